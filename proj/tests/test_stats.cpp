#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wfc/stats.hpp"

using namespace wfc;


TEST_CASE("McNemar b=15 c=5") {
    auto r = mcnemar(15, 5);
    REQUIRE(std::holds_alternative<OddsRatio>(r.effect));
    CHECK(std::get<OddsRatio>(r.effect).value == doctest::Approx(3.0));
    CHECK(r.p_value_raw == doctest::Approx(wfc::oracle::binomial_two_sided(15, 20)).epsilon(1e-12));
    CHECK(r.p_value_raw == doctest::Approx(0.04138947).epsilon(1e-6));
}

TEST_CASE("McNemar symmetry and degenerate cases") {
    auto r = mcnemar(7, 7);
    CHECK(std::get<OddsRatio>(r.effect).value == doctest::Approx(1.0));
    CHECK(r.p_value_raw == doctest::Approx(1.0));
    auto none = mcnemar(0, 0);
    CHECK(none.degenerate.has_value());
    CHECK(none.p_value_raw == 1.0);
    CHECK(std::isinf(std::get<OddsRatio>(mcnemar(4, 0).effect).value));
}

TEST_CASE("McNemar large-sample chi-square") {
    auto r = mcnemar(40, 20);
    double chi = std::pow(std::abs(40.0 - 20.0) - 1.0, 2) / 60.0;
    CHECK(r.statistic == doctest::Approx(chi));
    CHECK(r.p_value_raw == doctest::Approx(std::erfc(std::sqrt(chi / 2))));
}

TEST_CASE("McNemar ignores concordant pairs") {
    std::vector<std::pair<bool, bool>> pairs;
    for (int i = 0; i < 6; ++i) pairs.push_back({true, false});
    for (int i = 0; i < 2; ++i) pairs.push_back({false, true});
    auto base = mcnemar(pairs);
    for (int i = 0; i < 50; ++i) pairs.push_back({i % 2 == 0, i % 2 == 0});
    auto more = mcnemar(pairs);
    CHECK(base.p_value_raw == more.p_value_raw);
    CHECK(std::get<OddsRatio>(base.effect).value == std::get<OddsRatio>(more.effect).value);
    CHECK(base.p_value_raw == doctest::Approx(mcnemar(6, 2).p_value_raw));
}

TEST_CASE("property: exact McNemar matches the binomial oracle for b+c <= 20") {
    for (int b = 0; b <= 20; ++b)
        for (int c = 0; b + c <= 20; ++c) {
            if (b + c == 0) continue;
            auto r = mcnemar(static_cast<std::size_t>(b), static_cast<std::size_t>(c));
            CHECK(r.p_value_raw == doctest::Approx(wfc::oracle::binomial_two_sided(b, b + c)).epsilon(1e-12));
            CHECK(binomial_two_sided(b, b + c) == doctest::Approx(wfc::oracle::binomial_two_sided(b, b + c)).epsilon(1e-12));
        }
}

TEST_CASE("Wilcoxon extreme case") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= 6; ++i) pairs.push_back({i + 10.0, 0.0});
    auto r = wilcoxon_signed_rank(pairs);
    CHECK(r.p_value_raw == doctest::Approx(2.0 / 64.0));
    CHECK(r.statistic == doctest::Approx(0.0));
}

TEST_CASE("Wilcoxon all-zero differences") {
    auto r = wilcoxon_signed_rank({{1, 1}, {2, 2}});
    CHECK(r.degenerate.has_value());
    CHECK(r.p_value_raw == 1.0);
}

TEST_CASE("Wilcoxon 8-pair fixture matches enumeration") {
    std::vector<std::pair<double, double>> pairs = {{0.9, 0.5}, {0.4, 0.6}, {0.8, 0.3}, {0.7, 0.7},
                                                     {0.6, 0.2}, {0.3, 0.5}, {1.0, 0.1}, {0.5, 0.1}};
    std::vector<double> d;
    for (auto [x, y] : pairs) d.push_back(x - y);
    auto [w, p] = wfc::oracle::wilcoxon(d);
    auto r = wilcoxon_signed_rank(pairs);
    CHECK(r.statistic == doctest::Approx(w));
    CHECK(r.p_value_raw == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("property: exact Wilcoxon matches enumeration for n <= 10 with ties") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 1 + rng() % 10;
        std::vector<std::pair<double, double>> pairs;
        std::vector<double> d;
        for (std::size_t i = 0; i < n; ++i) {
            double x = static_cast<double>(rng() % 5), y = static_cast<double>(rng() % 5);
            pairs.push_back({x, y});
            d.push_back(x - y);
        }
        auto r = wilcoxon_signed_rank(pairs);
        if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0; })) {
            CHECK(r.degenerate.has_value());
            continue;
        }
        auto [w, p] = wfc::oracle::wilcoxon(d);
        CHECK(r.statistic == doctest::Approx(w));
        CHECK(r.p_value_raw == doctest::Approx(p).epsilon(1e-9));
        CHECK(r.p_value_raw <= 1.0);
    }
}

TEST_CASE("Wilcoxon normal approximation for large n") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 60; ++i) pairs.push_back({static_cast<double>(i % 7) + (i % 3 == 0 ? 1 : 0), double(i % 7)});
    auto r = wilcoxon_signed_rank(pairs);
    CHECK(r.p_value_raw > 0.0);
    CHECK(r.p_value_raw < 1e-3);
    // Symmetric differences give a large p.
    std::vector<std::pair<double, double>> sym;
    for (int i = 1; i <= 40; ++i) sym.push_back({i % 2 ? double(i) : 0.0, i % 2 ? 0.0 : double(i) - 1.0 + 1.0});
    CHECK(wilcoxon_signed_rank(sym).p_value_raw > 0.5);
}

TEST_CASE("Cliff's delta examples") {
    std::vector<double> a = {3, 4, 5}, b = {1, 4, 2};
    auto r = cliffs_delta(a, b);
    auto d = std::get<CliffsDelta>(r.effect);
    CHECK(d.value == doctest::Approx(wfc::oracle::cliffs_delta(a, b)));
    CHECK(d.value == doctest::Approx(6.0 / 9.0));
    CHECK(d.magnitude == Magnitude::Large);

    std::vector<double> same = {1, 2, 2, 3};
    std::vector<double> shuffled = {2, 3, 1, 2};
    auto z = std::get<CliffsDelta>(cliffs_delta(same, shuffled).effect);
    CHECK(z.value == 0.0);
    CHECK(z.magnitude == Magnitude::Negligible);

    std::vector<double> hi = {10, 11}, lo = {1, 2, 3};
    CHECK(std::get<CliffsDelta>(cliffs_delta(hi, lo).effect).value == 1.0);
}

TEST_CASE("magnitude thresholds") {
    CHECK(magnitude_of(0.099) == Magnitude::Negligible);
    CHECK(magnitude_of(0.10) == Magnitude::Small);
    CHECK(magnitude_of(-0.329) == Magnitude::Small);
    CHECK(magnitude_of(0.33) == Magnitude::Medium);
    CHECK(magnitude_of(0.4739) == Magnitude::Medium);
    CHECK(magnitude_of(-0.474) == Magnitude::Large);
}

TEST_CASE("property: Cliff's delta is antisymmetric and matches enumeration") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(1 + rng() % 20), b(1 + rng() % 20);
        for (auto& x : a) x = rng() % 6;
        for (auto& x : b) x = rng() % 6;
        double ab = std::get<CliffsDelta>(cliffs_delta(a, b).effect).value;
        double ba = std::get<CliffsDelta>(cliffs_delta(b, a).effect).value;
        CHECK(ab == doctest::Approx(wfc::oracle::cliffs_delta(a, b)));
        CHECK(ab == doctest::Approx(-ba));
    }
}

TEST_CASE("within-pair delta") {
    auto r = cliffs_delta_paired({{2, 1}, {1, 2}, {3, 1}, {1, 1}});
    CHECK(std::get<CliffsDelta>(r.effect).value == doctest::Approx(0.25));
    auto w = wilcoxon_signed_rank({{2, 1}, {1, 2}, {3, 1}, {1, 1}}, DeltaVariant::WithinPair);
    CHECK(std::get<CliffsDelta>(w.effect).value == doctest::Approx(0.25));
}

TEST_CASE("Holm examples") {
    auto adj = holm_adjust({0.01, 0.04, 0.03});
    REQUIRE(adj.size() == 3);
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.06));
    CHECK(adj[2] == doctest::Approx(0.06));
    CHECK(holm_adjust({0.2}) == std::vector<double>{0.2});
    CHECK(holm_adjust({1, 1, 1}) == std::vector<double>{1, 1, 1});
    CHECK(holm_adjust({}).empty());
}

TEST_CASE("property: Holm matches the step-down oracle and dominates raw p") {
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> p(1 + rng() % 8);
        for (auto& x : p) x = rng() % 4 == 0 ? 0.01 : u(rng);
        auto adj = holm_adjust(p);
        auto oracle = wfc::oracle::holm(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(adj[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
            CHECK(adj[i] >= p[i]);
            CHECK(adj[i] <= 1.0);
        }
        // Permuting the input permutes the output.
        std::vector<std::size_t> perm(p.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> q;
        for (auto i : perm) q.push_back(p[i]);
        auto adj_q = holm_adjust(q);
        for (std::size_t i = 0; i < perm.size(); ++i) CHECK(adj_q[i] == doctest::Approx(adj[perm[i]]));
    }
}

TEST_CASE("stat results serialise") {
    auto j = to_json(mcnemar(15, 5));
    CHECK(j["test"] == "mcnemar");
    CHECK(j["odds_ratio"].get<double>() == doctest::Approx(3.0));
    auto inf = to_json(mcnemar(3, 0));
    CHECK(inf["odds_ratio"].is_string());
}
