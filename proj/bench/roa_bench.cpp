// Wall-clock comparison of the serial and OpenMP membership grids.
//
//   roa_bench [n] [repeats]

#include <fmt/core.h>
#include <omp.h>

#include <chrono>
#include <cstdlib>

#include "dcmg/roa.hpp"

using namespace dcmg;

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
    Plant p;
    const auto modes = default_modes();
    const Box box{-40.0, 40.0, 20.0, 160.0};
    const RoaContext ctx{SwitchingStrategy::frozen(3, modes), pu_to_watts(0.1, p.circuit)};

    using clock = std::chrono::steady_clock;
    auto time_it = [&](auto&& f) {
        double best = 1e300;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = clock::now();
            f();
            best = std::min(best, std::chrono::duration<double>(clock::now() - t0).count());
        }
        return best;
    };

    MembershipGrid serial, parallel;
    const double ts = time_it([&] { serial = roa_grid_serial(ctx, box, n, n, p); });
    const double tp = time_it([&] { parallel = roa_grid(ctx, box, n, n, p, {}, 7); });

    fmt::print("grid {}x{} mode3 @ 0.1 pu, threads = {}\n", n, n, omp_get_max_threads());
    fmt::print("serial   {:8.3f} s\n", ts);
    fmt::print("openmp   {:8.3f} s  speedup {:.2f}x\n", tp, ts / tp);
    fmt::print("labels identical: {}\n", serial.labels == parallel.labels ? "yes" : "no");
    return serial.labels == parallel.labels ? 0 : 1;
}
