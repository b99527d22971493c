// Serial reference kernels against their OpenMP counterparts.
//   ./bench_kernels --benchmark_filter=load_vector

#include "kirchhoff/kernels.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

namespace k = kirchhoff::kernels;

std::vector<double> coeffs(std::size_t n) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> u(n);
    for (auto& x : u) {
        x = normal(rng);
    }
    return u;
}

const kirchhoff::ScalarMap f = [](double t) { return std::cos(t); };

template <bool Parallel>
void load_vector(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto u = coeffs(n);
    std::vector<double> out(n);
    const double delta = 1.0 / static_cast<double>(n + 1);
    const auto& rule = kirchhoff::QuadratureRule::gauss_legendre(4);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::load_vector(f, u, delta, rule, out);
        } else {
            k::serial::load_vector(f, u, delta, rule, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n + 1));
    state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
}

template <bool Parallel>
void integrate_composed(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto u = coeffs(n);
    const double delta = 1.0 / static_cast<double>(n + 1);
    const auto& rule = kirchhoff::QuadratureRule::gauss_legendre(4);
    for (auto _ : state) {
        double v = Parallel ? k::omp::integrate_composed(f, u, delta, rule)
                            : k::serial::integrate_composed(f, u, delta, rule);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n + 1));
}

template <bool Parallel>
void weighted_mass(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto u = coeffs(n);
    std::vector<double> diag(n);
    std::vector<double> off(n > 0 ? n - 1 : 0);
    const double delta = 1.0 / static_cast<double>(n + 1);
    const auto& rule = kirchhoff::QuadratureRule::gauss_legendre(4);
    const kirchhoff::ScalarMap w = [](double t) { return -std::sin(t); };
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::weighted_mass(w, u, delta, rule, diag, off);
        } else {
            k::serial::weighted_mass(w, u, delta, rule, diag, off);
        }
        benchmark::DoNotOptimize(diag.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n + 1));
}

template <bool Parallel>
void stiffness_apply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto u = coeffs(n);
    std::vector<double> out(n);
    const double delta = 1.0 / static_cast<double>(n + 1);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::stiffness_apply(u, delta, out);
        } else {
            k::serial::stiffness_apply(u, delta, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n + 1));
}

}  // namespace

BENCHMARK(load_vector<false>)->Name("load_vector/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(load_vector<true>)->Name("load_vector/omp")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(integrate_composed<false>)->Name("integrate_composed/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(integrate_composed<true>)->Name("integrate_composed/omp")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(weighted_mass<false>)->Name("weighted_mass/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(weighted_mass<true>)->Name("weighted_mass/omp")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(stiffness_apply<false>)->Name("stiffness_apply/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(stiffness_apply<true>)->Name("stiffness_apply/omp")->RangeMultiplier(8)->Range(64, 1 << 18);

BENCHMARK_MAIN();
