#include "topodisc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <tuple>

#include "topodisc/error.hpp"
#include "topodisc/simd/kernels.hpp"

namespace topodisc {

std::pair<std::vector<double>, std::vector<double>> paired_values(std::span<const double> x,
                                                                  std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "series lengths differ");
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        out.first.push_back(x[i]);
        out.second.push_back(y[i]);
    }
    return out;
}

std::optional<double> pcc(std::span<const double> xs, std::span<const double> ys) {
    const auto [x, y] = paired_values(xs, ys);
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    const auto& k = simd::real_kernels();
    const double mx = k.sum(x.data(), n) / static_cast<double>(n);
    const double my = k.sum(y.data(), n) / static_cast<double>(n);
    const auto m = k.centered_moments(x.data(), y.data(), n, mx, my);
    if (m.sxx <= 0 || m.syy <= 0) return std::nullopt;
    return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

namespace {

std::vector<unsigned> bin_series(std::span<const double> x, unsigned bins) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double a = *lo, width = (*hi - *lo) / bins;
    std::vector<unsigned> out(x.size(), 0);
    if (width <= 0) return out;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = std::min(bins - 1, static_cast<unsigned>((x[i] - a) / width));
    return out;
}

double entropy(const std::vector<double>& counts, double n) {
    double h = 0;
    for (double c : counts)
        if (c > 0) h -= (c / n) * std::log2(c / n);
    return h;
}

}  // namespace

std::optional<double> nmi(std::span<const double> xs, std::span<const double> ys, unsigned bins) {
    const auto [x, y] = paired_values(xs, ys);
    if (bins < 2) throw Error(ErrorCode::invalid_argument, "need at least two bins");
    if (x.size() < 2) return std::nullopt;
    const auto bx = bin_series(x, bins), by = bin_series(y, bins);
    std::vector<double> px(bins, 0), py(bins, 0), pxy(static_cast<std::size_t>(bins) * bins, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++px[bx[i]];
        ++py[by[i]];
        ++pxy[bx[i] * bins + by[i]];
    }
    const auto n = static_cast<double>(x.size());
    const double hx = entropy(px, n), hy = entropy(py, n);
    if (hx <= 0 || hy <= 0) return std::nullopt;
    const double mi = hx + hy - entropy(pxy, n);
    return std::clamp(mi / std::sqrt(hx * hy), 0.0, 1.0);
}

double dtw(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw Error(ErrorCode::invalid_argument, "DTW of an empty series");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(y.size() + 1, inf), cur(y.size() + 1, inf);
    prev[0] = 0;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= y.size(); ++j)
            cur[j] = std::abs(x[i - 1] - y[j - 1]) + std::min({prev[j - 1], prev[j], cur[j - 1]});
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

namespace {

std::optional<std::vector<double>> znormalize(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    const auto& k = simd::real_kernels();
    const double mean = k.sum(x.data(), x.size()) / n;
    const double var = k.centered_moments(x.data(), x.data(), x.size(), mean, mean).sxx / n;
    if (!(var > 0)) return std::nullopt;
    const double sd = std::sqrt(var);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

}  // namespace

std::optional<double> ndtw(std::span<const double> xs, std::span<const double> ys) {
    // Equal lengths drop no-data pairwise; otherwise each series on its own.
    std::vector<double> x, y;
    if (xs.size() == ys.size()) {
        std::tie(x, y) = paired_values(xs, ys);
    } else {
        std::copy_if(xs.begin(), xs.end(), std::back_inserter(x), [](double v) { return !std::isnan(v); });
        std::copy_if(ys.begin(), ys.end(), std::back_inserter(y), [](double v) { return !std::isnan(v); });
    }
    if (x.empty() || y.empty()) return std::nullopt;
    const auto zx = znormalize(x), zy = znormalize(y);
    if (!zx || !zy) return std::nullopt;
    // DTW against an all-zero series reduces to the sum of absolute values.
    double dx0 = 0, dy0 = 0;
    for (double v : *zx) dx0 += std::abs(v);
    for (double v : *zy) dy0 += std::abs(v);
    return std::clamp(1.0 - dtw(*zx, *zy) / (dx0 + dy0), 0.0, 1.0);
}

}  // namespace topodisc
