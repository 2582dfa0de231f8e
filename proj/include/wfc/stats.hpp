#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wfc/records.hpp"

namespace wfc {

enum class Magnitude { Negligible, Small, Medium, Large };
std::string_view to_string(Magnitude m);

/// negligible |d| < 0.10, small < 0.33, medium < 0.474, large otherwise.
Magnitude magnitude_of(double delta);

struct OddsRatio {
    double value = 0.0;  // +inf when only the first approach has discordant wins
};

struct CliffsDelta {
    double value = 0.0;
    Magnitude magnitude = Magnitude::Negligible;
};

using Effect = std::variant<std::monostate, OddsRatio, CliffsDelta>;

struct StatResult {
    std::string test_name;
    double statistic = 0.0;
    double p_value_raw = 1.0;
    std::optional<double> p_value_adjusted;
    Effect effect;
    /// Set for degenerate inputs (no discordant pairs, all-zero differences).
    std::optional<std::string> degenerate;
};

/// Exact two-sided binomial tail for Bin(n, 1/2) at k: 2 * P(X <= min(k, n-k)), capped at 1.
double binomial_two_sided(std::size_t k, std::size_t n);

inline constexpr std::size_t kMcNemarExactBelow = 25;

/// Paired correctness (first approach, second approach). Odds ratio is b/c where b
/// counts pairs only the first got right and c those only the second got right.
/// Exact binomial p when b+c < 25, otherwise continuity-corrected chi-square.
StatResult mcnemar(const std::vector<std::pair<bool, bool>>& paired);
StatResult mcnemar(std::size_t b, std::size_t c);

inline constexpr std::size_t kWilcoxonExactUpTo = 25;

enum class DeltaVariant { Unpaired, WithinPair };

/// Two-sided signed-rank test on x - y. Zero differences are dropped, tied |d| get
/// average ranks. Exact null distribution for n <= 25, normal approximation above.
/// The effect is Cliff's delta between the x and y columns.
StatResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired,
                                DeltaVariant variant = DeltaVariant::Unpaired);

/// d = (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|).
StatResult cliffs_delta(std::span<const double> a, std::span<const double> b);

/// Within-pair variant: (#{x_i > y_i} - #{x_i < y_i}) / n.
StatResult cliffs_delta_paired(const std::vector<std::pair<double, double>>& paired);

/// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(const std::vector<double>& p_values);

ojson to_json(const StatResult& r);

}  // namespace wfc
