#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mhp/error.hpp"
#include "mhp/meta_loss.hpp"
#include "oracles.hpp"

using namespace mhp;

namespace {

MetaLossConfig config(std::size_t m, double eps = 0.05, double dropout = 0.0) {
    return {m, eps, dropout, LossKind::l2()};
}

HypothesisSet random_hyps(std::size_t m, std::size_t d, Rng& rng) {
    HypothesisSet h(m, d);
    for (auto& v : h.flat()) v = rng.normal();
    return h;
}

double active_sum(const AssignmentResult& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.weights.size(); ++j) {
        if (!a.dropped_mask[j]) s += a.weights[j];
    }
    return s;
}

}  // namespace

TEST_CASE("M=5 weights without dropout") {
    HypothesisSet h(5, 1, {0.0, 1.0, 2.0, 3.0, 4.0});
    const std::vector<double> y{0.1};
    const auto a = assign(config(5), h, Target::regression(y), std::vector<bool>(5, false));
    CHECK(a.best_index == 0);
    CHECK(a.weights[0] == doctest::Approx(0.95));
    for (std::size_t j = 1; j < 5; ++j) CHECK(a.weights[j] == doctest::Approx(0.0125));
}

TEST_CASE("nearest hypothesis wins") {
    HypothesisSet h(2, 2, {-0.5, -0.5, 0.5, 0.5});
    const std::vector<double> y{-0.4, -0.6};
    CHECK(assign(config(2), h, Target::regression(y), std::vector<bool>(2, false)).best_index == 0);
}

TEST_CASE("dropped hypothesis can be neither best nor share epsilon") {
    // losses 0.1, 0.4, 0.2 with hypothesis 0 dropped
    const double r0 = std::sqrt(0.2), r1 = std::sqrt(0.8), r2 = std::sqrt(0.4);
    HypothesisSet h(3, 1, {r0, r1, r2});
    const std::vector<double> y{0.0};
    const auto a = assign(config(3), h, Target::regression(y), {true, false, false});
    CHECK(a.per_hypothesis_losses[0] == doctest::Approx(0.1));
    CHECK(a.best_index == 2);
    CHECK(a.weights[0] == 0.0);
    CHECK(a.weights[1] == doctest::Approx(0.05));
    CHECK(a.weights[2] == doctest::Approx(0.95));
}

TEST_CASE("single active hypothesis gets weight 1") {
    HypothesisSet h(3, 1, {0.0, 1.0, 2.0});
    const std::vector<double> y{0.0};
    const auto a = assign(config(3), h, Target::regression(y), {true, false, true});
    CHECK(a.best_index == 1);
    CHECK(a.weights == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("ties resolve to the lowest index") {
    HypothesisSet h(3, 1, {1.0, -1.0, 1.0});
    const std::vector<double> y{0.0};
    CHECK(assign(config(3), h, Target::regression(y), std::vector<bool>(3, false)).best_index == 0);
}

TEST_CASE("meta-loss examples") {
    HypothesisSet h(2, 1, {std::sqrt(0.02), std::sqrt(2.02)});
    const std::vector<double> y{0.0};
    const auto a = assign(config(2), h, Target::regression(y), std::vector<bool>(2, false));
    CHECK(meta_loss(config(2), h, Target::regression(y), a) == doctest::Approx(0.06));
}

TEST_CASE("dropped hypothesis receives an exactly zero gradient") {
    Rng rng(1);
    const auto h = random_hyps(4, 2, rng);
    const std::vector<double> y{0.3, 0.3};
    const auto a = assign(config(4), h, Target::regression(y), {false, true, false, false});
    const auto g = meta_loss_upstream_grads(config(4), h, Target::regression(y), a);
    for (double v : g[1]) CHECK(v == 0.0);
}

TEST_CASE("dropout mask: never all dropped, all active for M=1") {
    Rng rng(2);
    const MetaLossConfig heavy{3, 0.05, 0.9, LossKind::l2()};
    std::size_t dropped = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto mask = sample_dropout_mask(heavy, rng);
        const auto n = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
        CHECK(n < 3);
        dropped += n;
    }
    CHECK(dropped > 0);
    const MetaLossConfig single{1, 0.05, 0.9, LossKind::l2()};
    for (int i = 0; i < 100; ++i) CHECK(sample_dropout_mask(single, rng) == std::vector<bool>{false});
}

TEST_CASE("dropout frequency matches the configured probability") {
    Rng rng(3);
    const MetaLossConfig cfg{10, 0.05, 0.2, LossKind::l2()};
    std::size_t dropped = 0;
    const std::size_t trials = 20000;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto mask = sample_dropout_mask(cfg, rng);
        dropped += static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    }
    const double rate = static_cast<double>(dropped) / static_cast<double>(trials * 10);
    CHECK(rate == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(MetaLossConfig({0, 0.05, 0.0, LossKind::l2()}).validate(), ValidationError);
    CHECK_THROWS_AS(MetaLossConfig({2, 0.0, 0.0, LossKind::l2()}).validate(), ValidationError);
    CHECK_THROWS_AS(MetaLossConfig({2, 1.0, 0.0, LossKind::l2()}).validate(), ValidationError);
    CHECK_THROWS_AS(MetaLossConfig({2, 0.05, 1.0, LossKind::l2()}).validate(), ValidationError);
    CHECK_NOTHROW(MetaLossConfig({1, 0.0, 0.0, LossKind::l2()}).validate());
}

TEST_CASE("property: weights are nonnegative, active weights sum to 1, best attains the active minimum") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const std::size_t m = 1 + rng.uniform_index(8);
        const MetaLossConfig cfg{m, rng.uniform(0.01, 0.5), 0.3, LossKind::l2()};
        const auto h = random_hyps(m, 2, rng);
        const std::vector<double> y{rng.normal(), rng.normal()};
        const auto a = assign(cfg, h, Target::regression(y), rng);
        CHECK(std::abs(active_sum(a) - 1.0) < 1e-12);
        for (std::size_t j = 0; j < m; ++j) {
            CHECK(a.weights[j] >= 0.0);
            if (a.dropped_mask[j]) CHECK(a.weights[j] == 0.0);
            if (!a.dropped_mask[j]) CHECK(a.per_hypothesis_losses[a.best_index] <= a.per_hypothesis_losses[j]);
        }
        CHECK_FALSE(a.dropped_mask[a.best_index]);
    }
}

TEST_CASE("property: M=1 meta-loss equals the base loss bit for bit") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const auto h = random_hyps(1, 3, rng);
        const std::vector<double> y{rng.normal(), rng.normal(), rng.normal()};
        const MetaLossConfig cfg{1, 0.05, 0.5, LossKind::l2()};
        const auto t = Target::regression(y);
        const auto a = assign(cfg, h, t, rng);
        CHECK(meta_loss(cfg, h, t, a) == loss(LossKind::l2(), h[0], t));
        const auto g = meta_loss_upstream_grads(cfg, h, t, a);
        const auto base = loss_grad(LossKind::l2(), h[0], t);
        for (std::size_t i = 0; i < 3; ++i) CHECK(g[0][i] == base[i]);
    }
}

TEST_CASE("property: permuting hypotheses permutes weights and gradients") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t m = 2 + rng.uniform_index(6);
        const auto h = random_hyps(m, 2, rng);
        const std::vector<double> y{rng.normal(), rng.normal()};
        std::vector<bool> mask(m);
        for (std::size_t j = 0; j + 1 < m; ++j) mask[j] = rng.bernoulli(0.3);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng.engine());

        HypothesisSet hp(m, 2);
        std::vector<bool> maskp(m);
        for (std::size_t j = 0; j < m; ++j) {
            std::copy(h[perm[j]].begin(), h[perm[j]].end(), hp[j].begin());
            maskp[j] = mask[perm[j]];
        }
        const auto t = Target::regression(y);
        const auto cfg = config(m);
        const auto a = assign(cfg, h, t, mask);
        const auto ap = assign(cfg, hp, t, maskp);
        const auto g = meta_loss_upstream_grads(cfg, h, t, a);
        const auto gp = meta_loss_upstream_grads(cfg, hp, t, ap);
        for (std::size_t j = 0; j < m; ++j) {
            CHECK(ap.weights[j] == a.weights[perm[j]]);
            CHECK(gp[j][0] == g[perm[j]][0]);
            CHECK(gp[j][1] == g[perm[j]][1]);
        }
    }
}

TEST_CASE("property: best hypothesis dominates when epsilon < (A-1)/A") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t m = 2 + rng.uniform_index(6);
        const double eps = rng.uniform(0.001, (static_cast<double>(m) - 1.0) / static_cast<double>(m) - 1e-6);
        const auto h = random_hyps(m, 2, rng);
        const std::vector<double> y{rng.normal(), rng.normal()};
        const auto a = assign(config(m, eps), h, Target::regression(y), std::vector<bool>(m, false));
        for (std::size_t j = 0; j < m; ++j) CHECK(a.weights[a.best_index] >= a.weights[j]);
    }
}

TEST_CASE("property: epsilon -> 0 recovers the hard minimum") {
    Rng rng(7);
    const auto h = random_hyps(5, 2, rng);
    const std::vector<double> y{0.2, -0.1};
    const auto t = Target::regression(y);
    double best = INFINITY;
    for (std::size_t j = 0; j < 5; ++j) best = std::min(best, loss(LossKind::l2(), h[j], t));
    double previous = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-4, 1e-8}) {
        const auto cfg = config(5, eps);
        const double v = meta_loss(cfg, h, t, assign(cfg, h, t, std::vector<bool>(5, false)));
        const double gap = std::abs(v - best);
        CHECK(gap <= previous);
        previous = gap;
    }
    CHECK(previous < 1e-7);

    // exact hit on a hypothesis
    const std::vector<double> hit(h[3].begin(), h[3].end());
    const auto cfg = config(5, 1e-10);
    const auto th = Target::regression(hit);
    CHECK(meta_loss(cfg, h, th, assign(cfg, h, th, std::vector<bool>(5, false))) < 1e-8);
}

TEST_CASE("property: upstream gradients match finite differences of the meta-loss") {
    const std::vector<LossKind> kinds{LossKind::l2(), LossKind::tukey(), LossKind::cross_entropy()};
    for (const auto& kind : kinds) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(seed + 500);
            const std::size_t m = 1 + rng.uniform_index(5);
            const std::size_t d = 3;
            const MetaLossConfig cfg{m, 0.05, 0.2, kind};
            const auto h = random_hyps(m, d, rng);
            const std::vector<double> y{rng.normal(), rng.normal(), rng.normal()};
            const Target t = kind.is_classification() ? Target::label(rng.uniform_index(d)) : Target::regression(y);
            const auto a = assign(cfg, h, t, rng);
            const auto g = meta_loss_upstream_grads(cfg, h, t, a);
            // the assignment is held fixed; it is piecewise constant in h
            for (std::size_t k = 0; k < m * d; ++k) {
                auto probe = h;
                const double fd = oracle::central_diff(
                    [&](double v) {
                        probe.flat()[k] = v;
                        return meta_loss(cfg, probe, t, a);
                    },
                    h.flat()[k]);
                worst = std::max(worst, oracle::rel_err(g.flat()[k], fd));
            }
        }
        CAPTURE(to_string(kind));
        CHECK(worst < 1e-6);
    }
}
