// Serial reference vs OpenMP kernels. Usage: bench_kernels [repeats]
// Thread count follows OMP_NUM_THREADS.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "mhp/datagen.hpp"
#include "mhp/kernels.hpp"

using namespace mhp;

namespace {

double best_ms(int repeats, const std::function<void()>& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-16s %10.2f %10.2f %8.2fx\n", name, serial, parallel, serial / parallel);
}

volatile double sink = 0.0;

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    Rng rng(1);

    PointSet samples(2);
    for (int i = 0; i < 400000; ++i) {
        const std::vector<double> p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        samples.push_back(p);
    }
    PointSet gens(2);
    for (int j = 0; j < 16; ++j) {
        const std::vector<double> p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        gens.push_back(p);
    }

    const auto data = datagen::sample_temporal2d_mixed(20000, rng);
    const auto model = MlpModel::create(1, {50, 50}, 2, 10, rng);
    const MetaLossConfig cfg{10, 0.05, 0.01, LossKind::l2()};
    std::vector<std::size_t> idx(4096);
    std::vector<std::vector<bool>> masks;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
        masks.push_back(sample_dropout_mask(cfg, rng));
    }

    std::printf("threads: %d, repeats: %d (best time in ms)\n", omp_get_max_threads(), repeats);
    std::printf("%-16s %10s %10s %9s\n", "kernel", "serial", "openmp", "speedup");
    const auto l2 = LossKind::l2();

    row("assign_cells",
        best_ms(repeats, [&] { sink = static_cast<double>(kernels::reference::assign_cells(gens, l2, samples).back()); }),
        best_ms(repeats, [&] { sink = static_cast<double>(kernels::assign_cells(gens, l2, samples).back()); }));
    row("sum_min_loss", best_ms(repeats, [&] { sink = kernels::reference::sum_min_loss(gens, l2, samples); }),
        best_ms(repeats, [&] { sink = kernels::sum_min_loss(gens, l2, samples); }));
    row("batch_gradient",
        best_ms(repeats, [&] { sink = kernels::reference::batch_gradient(model, cfg, data, idx, masks).sum_meta_loss; }),
        best_ms(repeats, [&] { sink = kernels::batch_gradient(model, cfg, data, idx, masks).sum_meta_loss; }));
    row("eval_sums", best_ms(repeats, [&] { sink = kernels::reference::eval_sums(model, data, l2).oracle_min; }),
        best_ms(repeats, [&] { sink = kernels::eval_sums(model, data, l2).oracle_min; }));
    return 0;
}
