// Independent reference implementations used by the tests. They are written
// from the definitions, without reusing library code paths.
#pragma once

#include "sps/pps.hpp"
#include "sps/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Direct scalar convolution, output-position first, bounds checked per tap.
inline sps::FeatureMap conv(const sps::FeatureMap& x, const sps::Tensor4& w, int stride, int pad)
{
    const int ho = (int(x.h()) + 2 * pad - int(w.h_k())) / stride + 1;
    const int wo = (int(x.w()) + 2 * pad - int(w.w_k())) / stride + 1;
    sps::FeatureMap y(w.c_out(), std::uint32_t(ho), std::uint32_t(wo));
    for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox)
            for (std::uint32_t o = 0; o < w.c_out(); ++o) {
                long long acc = 0;
                for (std::uint32_t kh = 0; kh < w.h_k(); ++kh)
                    for (std::uint32_t kw = 0; kw < w.w_k(); ++kw)
                        for (std::uint32_t i = 0; i < w.c_in(); ++i) {
                            int iy = oy * stride + int(kh) - pad;
                            int ix = ox * stride + int(kw) - pad;
                            if (iy < 0 || ix < 0 || iy >= int(x.h()) || ix >= int(x.w())) continue;
                            acc += (long long)x(i, iy, ix) * w(o, i, kh, kw);
                        }
                y(o, oy, ox) = std::int32_t(acc);
            }
    return y;
}

// Element-wise mask from the rotation rule.
inline sps::Tensor4 mask(const sps::Tensor4& d, const std::vector<std::vector<std::pair<int, int>>>& pats)
{
    sps::Tensor4 m = d;
    const auto P = pats.size();
    for (std::uint32_t o = 0; o < d.c_out(); ++o)
        for (std::uint32_t i = 0; i < d.c_in(); ++i) {
            const auto& pat = pats[(o + i) % P];
            for (std::uint32_t kh = 0; kh < d.h_k(); ++kh)
                for (std::uint32_t kw = 0; kw < d.w_k(); ++kw) {
                    bool keep = false;
                    for (auto [a, b] : pat) keep = keep || (a == int(kh) && b == int(kw));
                    if (!keep) m(o, i, kh, kw) = 0;
                }
        }
    return m;
}

inline int clog2(unsigned long long n)
{
    int b = 0;
    while ((1ull << b) < n) ++b;
    return b;
}

inline sps::Tensor4 random_tensor(std::mt19937& rng, std::uint32_t co, std::uint32_t ci, std::uint32_t hk,
                                  std::uint32_t wk, int lo = -128, int hi = 127)
{
    std::uniform_int_distribution<int> d(lo, hi);
    sps::Tensor4 t(co, ci, hk, wk);
    for (auto& v : t.values()) v = std::int8_t(d(rng));
    return t;
}

inline sps::FeatureMap random_map(std::mt19937& rng, std::uint32_t c, std::uint32_t h, std::uint32_t w,
                                  int lo = -128, int hi = 127)
{
    std::uniform_int_distribution<int> d(lo, hi);
    sps::FeatureMap f(c, h, w);
    for (auto& v : f.values()) v = d(rng);
    return f;
}

// Random config with P distinct sorted patterns of `support` taps.
inline sps::PpsConfig random_config(std::mt19937& rng, std::uint32_t P, std::uint32_t support, std::uint32_t hk,
                                    std::uint32_t wk)
{
    sps::PpsConfig cfg;
    cfg.period = P;
    cfg.support = support;
    cfg.h_k = hk;
    cfg.w_k = wk;
    cfg.strategy = sps::PatternStrategy::fixed;
    std::vector<std::uint32_t> taps(hk * wk);
    for (std::uint32_t t = 0; t < taps.size(); ++t) taps[t] = t;
    while (cfg.patterns.size() < P) {
        std::shuffle(taps.begin(), taps.end(), rng);
        sps::KernelVariant kv;
        for (std::uint32_t w = 0; w < support; ++w) kv.positions.emplace_back(taps[w] / wk, taps[w] % wk);
        std::sort(kv.positions.begin(), kv.positions.end());
        if (std::find(cfg.patterns.begin(), cfg.patterns.end(), kv) == cfg.patterns.end()) cfg.patterns.push_back(kv);
    }
    return cfg;
}

inline unsigned long long binom(unsigned n, unsigned k)
{
    unsigned long long r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace oracle
