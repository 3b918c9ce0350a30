// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mhp/datagen.hpp"
#include "mhp/eval.hpp"
#include "mhp/experiment.hpp"
#include "mhp/io.hpp"
#include "mhp/meta_loss.hpp"
#include "mhp/voronoi.hpp"
#include "oracles.hpp"

using namespace mhp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
        out.pass = false;
        out.detail += " [over time budget]";
    }
    if (!out.pass) ++failures;
    std::printf("%s %d %s: %s (%.1fs, budget %.0fs)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs,
                limit_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. gradients

double worst_loss_grad_error() {
    double worst = 0.0;
    for (const auto& kind : {LossKind::l2(), LossKind::cross_entropy(), LossKind::tukey()}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(seed);
            const std::size_t d = 1 + rng.uniform_index(6);
            std::vector<double> u(d), v(d);
            for (std::size_t i = 0; i < d; ++i) {
                u[i] = rng.normal(0.0, 2.0);
                v[i] = rng.normal(0.0, 2.0);
            }
            const Target t = kind.is_classification() ? Target::label(rng.uniform_index(d)) : Target::regression(v);
            const auto g = loss_grad(kind, u, t);
            for (std::size_t i = 0; i < d; ++i) {
                auto p = u;
                const double fd = oracle::central_diff(
                    [&](double x) {
                        p[i] = x;
                        return loss(kind, p, t);
                    },
                    u[i]);
                worst = std::max(worst, oracle::rel_err(g[i], fd));
            }
        }
    }
    return worst;
}

double worst_meta_grad_error() {
    double worst = 0.0;
    for (const auto& kind : {LossKind::l2(), LossKind::cross_entropy(), LossKind::tukey()}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(seed + 7000);
            const std::size_t m = 1 + rng.uniform_index(10);
            const std::size_t d = 3;
            const MetaLossConfig cfg{m, 0.05, 0.01, kind};
            HypothesisSet h(m, d);
            for (auto& x : h.flat()) x = rng.normal();
            const std::vector<double> y{rng.normal(), rng.normal(), rng.normal()};
            const Target t = kind.is_classification() ? Target::label(rng.uniform_index(d)) : Target::regression(y);
            const auto a = assign(cfg, h, t, rng);
            const auto g = meta_loss_upstream_grads(cfg, h, t, a);
            for (std::size_t k = 0; k < m * d; ++k) {
                auto p = h;
                const double fd = oracle::central_diff(
                    [&](double x) {
                        p.flat()[k] = x;
                        return meta_loss(cfg, p, t, a);
                    },
                    h.flat()[k]);
                worst = std::max(worst, oracle::rel_err(g.flat()[k], fd));
            }
        }
    }
    return worst;
}

double worst_network_grad_error() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 9000);
        auto model = MlpModel::create(2, {10, 10}, 2, 4, rng);
        for (auto& layer : model.layers()) {
            for (auto& b : layer.bias) b = rng.normal(0.0, 0.3);
        }
        if (model.parameter_count() > 500) throw std::logic_error("gradient model too large");
        const std::vector<double> x{rng.normal(), rng.normal()};
        HypothesisSet up(4, 2);
        for (auto& v : up.flat()) v = rng.normal();
        const auto grads = backward(model, x, up);
        const auto objective = [&] {
            const auto out = oracle::scalar_forward(model, x);
            double s = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * up.flat()[i];
            return s;
        };
        for (std::size_t k = 0; k < model.layers().size(); ++k) {
            auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const double saved = params[i];
                    const double fd = oracle::central_diff(
                        [&](double v) {
                            params[i] = v;
                            return objective();
                        },
                        saved);
                    params[i] = saved;
                    worst = std::max(worst, oracle::rel_err(analytic[i], fd));
                }
            };
            probe(model.layers()[k].weight, grads.layers()[k].weight);
            probe(model.layers()[k].bias, grads.layers()[k].bias);
        }
    }
    return worst;
}

Outcome gradient_suite() {
    const double l = worst_loss_grad_error();
    const double m = worst_meta_grad_error();
    const double n = worst_network_grad_error();
    const double worst = std::max({l, m, n});
    return {worst < 1e-5, fmt("worst rel err loss %.2e", l) + fmt(", meta-loss %.2e", m) + fmt(", mlp %.2e", n)};
}

// ---------------------------------------------------------------------------
// 2. reduction law

Outcome reduction_law() {
    std::size_t mismatches = 0;
    for (const auto& kind : {LossKind::l2(), LossKind::cross_entropy(), LossKind::tukey()}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(seed);
            HypothesisSet h(1, 4);
            for (auto& v : h.flat()) v = rng.normal(0.0, 3.0);
            const std::vector<double> y{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            const Target t = kind.is_classification() ? Target::label(rng.uniform_index(4)) : Target::regression(y);
            const MetaLossConfig cfg{1, 0.05, 0.01, kind};
            const auto a = assign(cfg, h, t, rng);
            if (meta_loss(cfg, h, t, a) != loss(kind, h[0], t)) ++mismatches;
        }
    }
    double worst_sum = 0.0;
    for (std::size_t m = 2; m <= 10; ++m) {
        for (double eps : {0.01, 0.05, 0.3}) {
            for (std::uint64_t seed = 0; seed < 50; ++seed) {
                Rng rng(seed * 31 + m);
                HypothesisSet h(m, 2);
                for (auto& v : h.flat()) v = rng.normal();
                const std::vector<double> y{rng.normal(), rng.normal()};
                const MetaLossConfig cfg{m, eps, 0.01, LossKind::l2()};
                const auto a = assign(cfg, h, Target::regression(y), rng);
                double s = 0.0;
                for (double w : a.weights) s += w;
                worst_sum = std::max(worst_sum, std::abs(s - 1.0));
            }
        }
    }
    return {mismatches == 0 && worst_sum <= 1e-12,
            std::to_string(mismatches) + " M=1 mismatches of 300, max |sum w - 1| = " + fmt("%.1e", worst_sum)};
}

// ---------------------------------------------------------------------------
// 3, 4, 7. temporal-2D toy

TrainConfig toy_config(std::size_t m, std::uint64_t seed) {
    TrainConfig c;
    c.num_hypotheses = m;
    c.epsilon = 0.05;
    c.dropout_prob = 0.01;
    c.base_loss = LossKind::l2();
    c.hidden = {50, 50};
    c.epochs = 100;
    c.batch_size = 32;
    c.optimizer = {OptimizerKind::SGDMomentum, 0.01, 0.9};
    c.seed = seed;
    c.dataset = {{"task", "temporal2d"}, {"n", 10000}};
    return c;
}

struct ToyModels {
    MlpModel shp, mhp4, mhp10;
    std::vector<MlpModel> mhp4_seeds;
};

ToyModels toy;

// Hypotheses lying in region a or b.
std::size_t count_in(const HypothesisSet& h, int a, int b) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        const int r = datagen::temporal2d_region(h[j][0], h[j][1]);
        n += (r == a || r == b) ? 1 : 0;
    }
    return n;
}

Outcome toy_reproduction() {
    toy.shp = run_training(toy_config(1, 1)).checkpoint.model;
    toy.mhp10 = run_training(toy_config(10, 1)).checkpoint.model;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) toy.mhp4_seeds.push_back(run_training(toy_config(4, seed)).checkpoint.model);
    toy.mhp4 = toy.mhp4_seeds.front();

    std::string detail;
    bool a_ok = true;
    double worst_dist = 0.0;
    for (double t : {0.0, 0.5, 1.0}) {
        const auto h = forward(toy.shp, std::vector<double>{t});
        worst_dist = std::max(worst_dist, std::hypot(h[0][0], h[0][1]));
    }
    a_ok = worst_dist < 0.1;
    detail += fmt("(a) SHP max |f - 0| = %.3f", worst_dist);

    std::size_t good_seeds = 0;
    std::string per_seed;
    for (const auto& model : toy.mhp4_seeds) {
        const auto n0 = count_in(forward(model, std::vector<double>{0.0}), 1, 4);
        const auto n1 = count_in(forward(model, std::vector<double>{1.0}), 2, 3);
        per_seed += " " + std::to_string(n0) + "/" + std::to_string(n1);
        if (n0 >= 3 && n1 >= 3) ++good_seeds;
    }
    const bool b_ok = good_seeds >= 4;
    detail += "; (b) seeds ok " + std::to_string(good_seeds) + "/5 [in S1uS4 at t=0 / S2uS3 at t=1:" + per_seed + "]";

    bool c_ok = true;
    detail += "; (c) oracle SHP/4/10:";
    for (double t : {0.0, 0.5, 1.0}) {
        Rng rng(100 + static_cast<std::uint64_t>(t * 10));
        const auto data = datagen::sample_temporal2d(t, 20000, rng);
        const double s = eval::oracle_min_loss(toy.shp, data, LossKind::l2());
        const double m4 = eval::oracle_min_loss(toy.mhp4, data, LossKind::l2());
        const double m10 = eval::oracle_min_loss(toy.mhp10, data, LossKind::l2());
        c_ok = c_ok && s > m4 && m4 > m10;
        detail += fmt(" t=%.1f ", t) + fmt("%.3f/", s) + fmt("%.3f/", m4) + fmt("%.3f", m10);
    }
    return {a_ok && b_ok && c_ok, detail};
}

Outcome centroidal_fixed_point() {
    const auto h = forward(toy.mhp4, std::vector<double>{0.0});
    PointSet gens(2);
    for (std::size_t j = 0; j < h.size(); ++j) gens.push_back(h[j]);
    Rng rng(4242);
    const auto samples = datagen::sample_temporal2d(0.0, 100000, rng).target_points();

    const auto tess = voronoi::tessellate(gens, LossKind::l2(), samples);
    const auto residual = voronoi::centroidal_residual(tess.tessellation, tess.stats);
    const double mhp_qerr = voronoi::quantization_error(gens, LossKind::l2(), samples);

    Rng lloyd_rng(17);
    const auto lloyd = voronoi::lloyd_restarts(samples, 4, 5, lloyd_rng);
    const auto lt = voronoi::tessellate(lloyd.generators, LossKind::l2(), samples);
    const double lloyd_residual = voronoi::centroidal_residual(lt.tessellation, lt.stats).max;

    const double ratio = mhp_qerr / lloyd.quantization_error;
    const bool ok = residual.max < 0.15 && lloyd_residual < 0.02 && ratio <= 1.3;
    return {ok, fmt("MHP residual %.4f", residual.max) + fmt(", Lloyd residual %.1e", lloyd_residual) +
                    fmt(", quantization error MHP %.4f", mhp_qerr) + fmt(" vs Lloyd %.4f", lloyd.quantization_error) +
                    fmt(" (ratio %.3f)", ratio)};
}

Outcome nested_monotonicity() {
    Rng rng(777);
    const auto data = datagen::sample_temporal2d_mixed(20000, rng);
    std::string detail = "oracle-min by k:";
    bool ok = true;
    double previous = INFINITY;
    for (std::size_t k = 1; k <= 10; ++k) {
        const double v = eval::oracle_min_loss(toy.mhp10.with_heads(k), data, LossKind::l2());
        ok = ok && v <= previous;
        previous = v;
        detail += fmt(" %.4f", v);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------------------
// 5. grid sharpness

json checkerboard_terminals() {
    json t = json::array();
    for (int y = 1; y <= 6; ++y) {
        for (int x = 1; x <= 6; ++x) {
            if ((x + y) % 2 == 0) t.push_back({x, y});
        }
    }
    return t;
}

Outcome sharpness_direction() {
    json dataset = {{"task", "gridframe"}, {"n", 2000}, {"terminals", checkerboard_terminals()}};
    const auto spec = grid_spec_from_json(dataset);
    Rng eval_rng(77);
    const auto data = datagen::sample_gridframe(spec, 2000, eval_rng);

    std::size_t good = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double sharp[3], mse[3];
        const std::size_t ms[3] = {1, 5, 10};
        for (int i = 0; i < 3; ++i) {
            TrainConfig c;
            c.num_hypotheses = ms[i];
            c.seed = seed;
            c.epochs = 60;
            c.batch_size = 32;
            c.optimizer = {OptimizerKind::SGDMomentum, 0.02, 0.9};
            c.hidden = {32};
            c.dataset = dataset;
            const auto model = run_training(c).checkpoint.model;
            sharp[i] = eval::mean_sharpness(model, data, spec.width, spec.height, spec.channels);
            mse[i] = eval::oracle_min_loss(model, data, LossKind::l2());
        }
        const bool ok = sharp[2] > sharp[1] && sharp[1] > sharp[0] && mse[0] > mse[1] && mse[1] > mse[2];
        good += ok ? 1 : 0;
        detail += " seed " + std::to_string(seed) + fmt(" sharp %.4f/", sharp[0]) + fmt("%.4f/", sharp[1]) +
                  fmt("%.4f", sharp[2]) + fmt(" mse %.3f/", mse[0]) + fmt("%.3f/", mse[1]) + fmt("%.3f;", mse[2]);
    }
    return {good >= 4, std::to_string(good) + "/5 seeds ordered (SHP/5/10):" + detail};
}

// ---------------------------------------------------------------------------
// 6. multi-label coverage

Outcome multilabel_coverage() {
    std::size_t good = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const json dataset = {{"task", "multilabel"}, {"n", 2400}, {"num_classes", 6}, {"copies", 10}, {"spec_seed", seed}};
        double recall[2];
        const std::size_t ms[2] = {1, 3};
        Rng eval_rng(5);
        const auto data = datagen::sample_multilabel(multilabel_spec_from_json(dataset), 1200, eval_rng);
        for (int i = 0; i < 2; ++i) {
            TrainConfig c;
            c.num_hypotheses = ms[i];
            c.base_loss = LossKind::cross_entropy();
            c.seed = seed;
            c.epochs = 40;
            c.batch_size = 32;
            c.optimizer = {OptimizerKind::SGDMomentum, 0.01, 0.9};
            c.hidden = {32, 32};
            c.dataset = dataset;
            recall[i] = eval::multilabel_scores(run_training(c).checkpoint.model, data).recall_at_m;
        }
        good += recall[1] - recall[0] >= 0.25 ? 1 : 0;
        detail += fmt(" %.3f", recall[0]) + fmt("/%.3f", recall[1]);
    }
    return {good >= 4, std::to_string(good) + "/5 seeds with gap >= 0.25 (SHP/3-MHP recall):" + detail};
}

// ---------------------------------------------------------------------------
// 8. determinism through the CLI

int run_cli(const std::string& args) {
    const std::string cmd = "\"" MHP_CLI_PATH "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "mhp_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    std::string detail;
    bool ok = true;

    for (const char* task : {"temporal2d", "gridframe", "multilabel", "gmm"}) {
        const std::string base = std::string("gen --task ") + task + " --n 3000 --seed 11 --out ";
        const auto a = root / (std::string("gen_") + task + "_a");
        const auto b = root / (std::string("gen_") + task + "_b");
        const bool same = run_cli(base + "\"" + a.string() + "\"") == 0 && run_cli(base + "\"" + b.string() + "\"") == 0 &&
                          slurp(a / "data.csv") == slurp(b / "data.csv") &&
                          slurp(a / "data.json") == slurp(b / "data.json");
        ok = ok && same;
        detail += std::string(task) + (same ? " identical, " : " DIFFERS, ");
    }

    auto config = toy_config(4, 23).to_json();
    config["epochs"] = 10;
    config["dataset"]["n"] = 3000;
    std::ofstream(root / "train.json") << config.dump();
    const std::string base = "train --config \"" + (root / "train.json").string() + "\" --out ";
    const bool trained = run_cli(base + "\"" + (root / "run_a").string() + "\"") == 0 &&
                         run_cli(base + "\"" + (root / "run_b").string() + "\"") == 0;
    const bool logs = trained && slurp(root / "run_a" / "metrics.jsonl") == slurp(root / "run_b" / "metrics.jsonl") &&
                      !slurp(root / "run_a" / "metrics.jsonl").empty();
    const bool ckpts = trained && slurp(root / "run_a" / "checkpoint.json") == slurp(root / "run_b" / "checkpoint.json");
    ok = ok && logs && ckpts;
    detail += std::string("train metrics log ") + (logs ? "identical" : "DIFFERS") + ", checkpoint " +
              (ckpts ? "identical" : "DIFFERS");
    fs::remove_all(root);
    return {ok, detail};
}

}  // namespace

int main() {
    criterion(1, "gradient suite", 10, gradient_suite);
    criterion(2, "reduction law", 1, reduction_law);
    criterion(3, "toy reproduction", 300, toy_reproduction);
    criterion(4, "centroidal fixed point", 60, centroidal_fixed_point);
    criterion(5, "sharpness direction", 300, sharpness_direction);
    criterion(6, "multi-label coverage", 180, multilabel_coverage);
    criterion(7, "oracle-min monotonicity", 60, nested_monotonicity);
    criterion(8, "determinism", 120, determinism);
    std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
