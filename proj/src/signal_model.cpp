#include "icilab/signal_model.hpp"

#include <numbers>

namespace icilab {

int bits_per_symbol(int psk_order) {
    switch (psk_order) {
        case 2: return 1;
        case 4: return 2;
        case 8: return 3;
        default:
            throw config_error("psk_order must be 2, 4 or 8, got " +
                               std::to_string(psk_order));
    }
}

cplx psk_point(int gray_index, int psk_order) {
    const double offset = (psk_order == 4) ? std::numbers::pi / 4.0 : 0.0;
    const double angle =
        2.0 * std::numbers::pi * gray_index / psk_order + offset;
    return std::polar(1.0, angle);
}

CVec map_bits_to_psk(std::span<const std::uint8_t> bits, int psk_order) {
    const int bps = bits_per_symbol(psk_order);
    if (bits.size() % bps != 0)
        throw shape_error("bit count " + std::to_string(bits.size()) +
                          " not divisible by log2(Q)=" + std::to_string(bps));

    CVec out;
    out.reserve(bits.size() / bps);
    for (std::size_t i = 0; i < bits.size(); i += bps) {
        int value = 0;
        for (int b = 0; b < bps; ++b) value = (value << 1) | (bits[i + b] & 1);
        const int gray = value ^ (value >> 1);
        out.push_back(psk_point(gray, psk_order));
    }
    return out;
}

CVec differential_encode(const CVec& b, cplx c) {
    CVec d(b.size() + 1);
    d[0] = c;
    for (std::size_t k = 1; k < d.size(); ++k) d[k] = b[k - 1] * d[k - 1];
    return d;
}

CVec differential_decode(const CVec& d) {
    if (d.size() < 2) throw shape_error("differential_decode: need >= 2 entries");
    CVec b(d.size() - 1);
    for (std::size_t k = 1; k < d.size(); ++k) {
        if (d[k - 1] == cplx{0.0, 0.0})
            throw degenerate_error("differential_decode: zero reference at carrier " +
                                   std::to_string(k - 1));
        b[k - 1] = d[k] / d[k - 1];
    }
    return b;
}

cplx slice_psk_one(cplx value, int psk_order) {
    double best_dist = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    cplx best{};
    for (int g = 0; g < psk_order; ++g) {
        const cplx p = psk_point(g, psk_order);
        const double dist = std::norm(value - p);
        double ang = std::arg(p);
        if (ang < 0) ang += 2.0 * std::numbers::pi;
        if (dist < best_dist - 1e-12 ||
            (std::abs(dist - best_dist) <= 1e-12 && ang < best_angle)) {
            best_dist = dist;
            best_angle = ang;
            best = p;
        }
    }
    return best;
}

CVec slice_psk(const CVec& values, int psk_order) {
    CVec out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = slice_psk_one(values[i], psk_order);
    return out;
}

}  // namespace icilab
