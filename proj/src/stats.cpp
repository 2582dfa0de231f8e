#include "wfc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wfc/error.hpp"

namespace wfc {

std::string_view to_string(Magnitude m) {
    switch (m) {
        case Magnitude::Negligible: return "negligible";
        case Magnitude::Small: return "small";
        case Magnitude::Medium: return "medium";
        case Magnitude::Large: return "large";
    }
    return {};
}

Magnitude magnitude_of(double delta) {
    double d = std::abs(delta);
    if (d < 0.10) return Magnitude::Negligible;
    if (d < 0.33) return Magnitude::Small;
    if (d < 0.474) return Magnitude::Medium;
    return Magnitude::Large;
}

double binomial_two_sided(std::size_t k, std::size_t n) {
    if (n == 0) return 1.0;
    std::size_t lo = std::min(k, n - k);
    // Sum in log space so large n stays finite.
    double tail = 0.0;
    const double log_half_n = static_cast<double>(n) * std::log(0.5);
    for (std::size_t i = 0; i <= lo; ++i) {
        double log_choose = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                            std::lgamma(static_cast<double>(n - i) + 1);
        tail += std::exp(log_choose + log_half_n);
    }
    return std::min(1.0, 2.0 * tail);
}

StatResult mcnemar(std::size_t b, std::size_t c) {
    StatResult r;
    r.test_name = "mcnemar";
    std::size_t n = b + c;
    if (n == 0) {
        r.p_value_raw = 1.0;
        r.degenerate = "no discordant pairs";
        return r;
    }
    if (n < kMcNemarExactBelow) {
        r.statistic = static_cast<double>(std::min(b, c));
        r.p_value_raw = binomial_two_sided(b, n);
    } else {
        double diff = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
        diff = std::max(diff, 0.0);
        r.statistic = diff * diff / static_cast<double>(n);
        // Chi-square with one degree of freedom.
        r.p_value_raw = std::min(1.0, std::erfc(std::sqrt(r.statistic / 2.0)));
    }
    r.effect = OddsRatio{c == 0 ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(b) / static_cast<double>(c)};
    return r;
}

StatResult mcnemar(const std::vector<std::pair<bool, bool>>& paired) {
    std::size_t b = 0;
    std::size_t c = 0;
    for (auto [first, second] : paired) {
        if (first && !second) ++b;
        if (!first && second) ++c;
    }
    return mcnemar(b, c);
}

StatResult cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptyInput("cliffs_delta: both samples must be non-empty");
    std::vector<double> sorted(b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());
    long long dominance = 0;
    for (double x : a) {
        auto less = std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        auto greater = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        dominance += static_cast<long long>(less) - static_cast<long long>(greater);
    }
    StatResult r;
    r.test_name = "cliffs_delta";
    double d = static_cast<double>(dominance) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    r.statistic = d;
    r.p_value_raw = 1.0;
    r.effect = CliffsDelta{d, magnitude_of(d)};
    return r;
}

StatResult cliffs_delta_paired(const std::vector<std::pair<double, double>>& paired) {
    if (paired.empty()) throw EmptyInput("cliffs_delta_paired: no pairs");
    long long dominance = 0;
    for (auto [x, y] : paired) dominance += (x > y) - (x < y);
    StatResult r;
    r.test_name = "cliffs_delta_paired";
    double d = static_cast<double>(dominance) / static_cast<double>(paired.size());
    r.statistic = d;
    r.p_value_raw = 1.0;
    r.effect = CliffsDelta{d, magnitude_of(d)};
    return r;
}

namespace {

// Doubled average ranks of |d| (integers even with ties).
std::vector<long> doubled_ranks(const std::vector<double>& magnitudes) {
    std::vector<std::size_t> order(magnitudes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return magnitudes[i] < magnitudes[j]; });
    std::vector<long> ranks(magnitudes.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
        // Positions i..j share ranks (i+1)..(j+1); doubled average is i+j+2.
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = static_cast<long>(i + j + 2);
        i = j + 1;
    }
    return ranks;
}

}  // namespace

StatResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired, DeltaVariant variant) {
    StatResult r;
    r.test_name = "wilcoxon";
    if (!paired.empty()) {
        if (variant == DeltaVariant::WithinPair) {
            r.effect = cliffs_delta_paired(paired).effect;
        } else {
            std::vector<double> xs;
            std::vector<double> ys;
            for (auto [x, y] : paired) {
                xs.push_back(x);
                ys.push_back(y);
            }
            r.effect = cliffs_delta(xs, ys).effect;
        }
    }

    std::vector<double> magnitudes;
    std::vector<bool> positive;
    for (auto [x, y] : paired) {
        double d = x - y;
        if (d == 0.0) continue;
        magnitudes.push_back(std::abs(d));
        positive.push_back(d > 0);
    }
    const std::size_t n = magnitudes.size();
    if (n == 0) {
        r.p_value_raw = 1.0;
        r.degenerate = "all differences are zero";
        return r;
    }
    auto ranks = doubled_ranks(magnitudes);
    long total2 = std::accumulate(ranks.begin(), ranks.end(), 0L);
    long plus2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (positive[i]) plus2 += ranks[i];
    r.statistic = static_cast<double>(std::min(plus2, total2 - plus2)) / 2.0;

    if (n <= kWilcoxonExactUpTo) {
        // Number of sign assignments per doubled W+ value.
        std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
        ways[0] = 1.0;
        long reach = 0;
        for (long rank : ranks) {
            for (long s = reach; s >= 0; --s) {
                if (ways[static_cast<std::size_t>(s)] != 0.0)
                    ways[static_cast<std::size_t>(s + rank)] += ways[static_cast<std::size_t>(s)];
            }
            reach += rank;
        }
        double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0;
        double upper = 0.0;
        for (long s = 0; s <= total2; ++s) {
            if (s <= plus2) lower += ways[static_cast<std::size_t>(s)];
            if (s >= plus2) upper += ways[static_cast<std::size_t>(s)];
        }
        r.p_value_raw = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        return r;
    }

    double nn = static_cast<double>(n);
    double mean = nn * (nn + 1) / 4.0;
    double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
    std::vector<long> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        double t = static_cast<double>(j - i);
        var -= (t * t * t - t) / 48.0;
        i = j;
    }
    double z = var > 0 ? (static_cast<double>(plus2) / 2.0 - mean) / std::sqrt(var) : 0.0;
    r.p_value_raw = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    return r;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("holm_adjust: p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = std::min(1.0, p_values[order[i]] * static_cast<double>(m - i));
        running = std::max(running, v);
        adjusted[order[i]] = running;
    }
    return adjusted;
}

ojson to_json(const StatResult& r) {
    ojson j;
    j["test"] = r.test_name;
    j["statistic"] = r.statistic;
    j["p_value_raw"] = r.p_value_raw;
    j["p_value_adjusted"] = r.p_value_adjusted ? ojson(*r.p_value_adjusted) : ojson(nullptr);
    if (const auto* o = std::get_if<OddsRatio>(&r.effect)) {
        j["odds_ratio"] = std::isinf(o->value) ? ojson("inf") : ojson(o->value);
    } else if (const auto* d = std::get_if<CliffsDelta>(&r.effect)) {
        j["cliffs_delta"] = d->value;
        j["magnitude"] = to_string(d->magnitude);
    }
    if (r.degenerate) j["degenerate"] = *r.degenerate;
    return j;
}

}  // namespace wfc
