#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcs/kernels.hpp"
#include "mcs/schedulability.hpp"
#include "support.hpp"

#include <vector>

using namespace mcs;
using kernels::PairVariant;

namespace {

std::vector<Ticks> run(void (*fn)(const kernels::Columns&, Ticks, std::size_t, Ticks*), const kernels::Columns& c,
                       Ticks t0, std::size_t n)
{
    std::vector<Ticks> out(n, -12345);
    fn(c, t0, n, out.data());
    return out;
}

// Scaled sets (rational tight deadlines) stress the larger tick values.
TaskSet scaled_set(std::mt19937_64& rng)
{
    TaskSet ts = support::random_set(rng);
    std::vector<Task> tasks = ts.tasks();
    for (auto& t : tasks)
        if (t.is_hi()) {
            const std::int64_t den = std::uniform_int_distribution<std::int64_t>(1, 13)(rng);
            const Rational span = Rational(t.deadline - t.wcet_lo);
            const std::int64_t num = std::uniform_int_distribution<std::int64_t>(0, den)(rng);
            t.tight_deadline = make_rational(t.wcet_lo) + span * make_rational(num, den);
        }
    return TaskSet(tasks);
}

}  // namespace

TEST_CASE("scalar batch kernels match the per-point reference")
{
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const TickSet ts = to_ticks(support::random_set(rng));
        const auto all = kernels::make_columns(ts);
        const auto hic = kernels::make_hi_columns(ts);
        const auto lc = run(kernels::scalar::lc_excess_batch, all, 0, 64);
        const auto pr = run(kernels::scalar::prior_excess_batch, hic, 0, 64);
        for (Ticks t = 0; t < 64; ++t) {
            Ticks d = 0;
            for (const auto& k : ts.tasks)
                d += ticks::dbf_lc(k, t);
            CHECK(lc[t] == d - t);
            CHECK(pr[t] == tick::prior_lhs(ts, t) - t);
        }
        for (Ticks delta = 1; delta < 30; ++delta)
            for (PairVariant v : {PairVariant::Improved, PairVariant::New}) {
                const auto f = kernels::make_pair_frame(ts, delta, v);
                std::vector<Ticks> out(40);
                kernels::scalar::pair_excess_batch(f, v, 0, out.size(), out.data());
                for (Ticks t1 = 0; t1 < 40; ++t1)
                    CHECK(out[t1] == tick::pair_lhs(ts, v, t1, t1 + delta) - t1 - delta);
            }
    }
}

TEST_CASE("avx2 kernels are bit-identical to scalar kernels")
{
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    std::mt19937_64 rng(99);
    std::size_t checks = 0;
    for (int i = 0; i < 400; ++i) {
        const TickSet ts = to_ticks(i % 2 ? scaled_set(rng) : support::random_set(rng));
        const auto all = kernels::make_columns(ts);
        const auto hic = kernels::make_hi_columns(ts);
        const Ticks t0 = std::uniform_int_distribution<Ticks>(0, 5000)(rng);
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 67)(rng);
        CHECK(run(kernels::scalar::lc_excess_batch, all, t0, n) == run(kernels::avx2::lc_excess_batch, all, t0, n));
        CHECK(run(kernels::scalar::prior_excess_batch, hic, t0, n)
              == run(kernels::avx2::prior_excess_batch, hic, t0, n));
        for (int r = 0; r < 8; ++r) {
            const Ticks delta = std::uniform_int_distribution<Ticks>(1, 200 * ts.scale)(rng);
            for (PairVariant v : {PairVariant::Improved, PairVariant::New}) {
                const auto f = kernels::make_pair_frame(ts, delta, v);
                std::vector<Ticks> a(n), b(n);
                kernels::scalar::pair_excess_batch(f, v, t0, n, a.data());
                kernels::avx2::pair_excess_batch(f, v, t0, n, b.data());
                CHECK(a == b);
                checks += n;
            }
        }
    }
    CHECK(checks > 0);
}

TEST_CASE("first-failure scan returns the earliest positive point")
{
    const TickSet ts = to_ticks(TaskSet({support::lo(1, 4, 4, 3), support::lo(2, 4, 4, 3)}));
    const auto all = kernels::make_columns(ts);
    for (kernels::Isa isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
        kernels::set_isa(isa);
        Ticks ex = 0;
        CHECK(kernels::lc_first_failure(all, 1, 1000, &ex) == 4);
        CHECK(ex == 2);
        CHECK(kernels::lc_first_failure(all, 1, 3, &ex) == -1);
    }
    kernels::set_isa(kernels::detected_isa());
}

TEST_CASE("MCS_SIMD=scalar is honoured")
{
    CHECK(std::string(kernels::to_string(kernels::Isa::Scalar)) == "scalar");
    CHECK(std::string(kernels::to_string(kernels::Isa::Avx2)) == "avx2");
    setenv("MCS_SIMD", "scalar", 1);
    CHECK(kernels::detected_isa() == kernels::Isa::Scalar);
    unsetenv("MCS_SIMD");
}
