#include "icilab/fft.hpp"

#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace icilab::dsp {

bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

namespace {

// table[k] = e^{-j 2 pi k / size}, k = 0 .. size/2 - 1
std::shared_ptr<const CVec> twiddles_for(std::size_t size) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, std::shared_ptr<const CVec>> cache;

    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(size);
    if (it != cache.end()) return it->second;

    auto table = std::make_shared<CVec>(size / 2);
    const double step = -2.0 * std::numbers::pi / static_cast<double>(size);
    for (std::size_t k = 0; k < size / 2; ++k)
        (*table)[k] = std::polar(1.0, step * static_cast<double>(k));
    cache.emplace(size, table);
    return table;
}

void bit_reverse_permute(CVec& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
}

}  // namespace

void fft_inplace(CVec& data, bool inverse) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if (!is_power_of_two(n))
        throw shape_error("fft: length must be a power of two, got " +
                          std::to_string(n));

    auto table = twiddles_for(n);
    const CVec& tw = *table;

    bit_reverse_permute(data);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = tw[k * stride];
                if (inverse) w = std::conj(w);
                const cplx u = data[base + k];
                const cplx v = data[base + k + len / 2] * w;
                data[base + k] = u + v;
                data[base + k + len / 2] = u - v;
            }
        }
    }
}

CVec fft(const CVec& data, bool inverse) {
    CVec out = data;
    fft_inplace(out, inverse);
    return out;
}

}  // namespace icilab::dsp
