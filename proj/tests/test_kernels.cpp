// Scalar reference vs vectorized kernels on random data of awkward lengths.
#include "invcone/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace invcone::kernels {
namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

std::vector<Isa> vector_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::avx2, Isa::neon})
        if (isa_supported(isa)) out.push_back(isa);
    return out;
}

const std::size_t kLengths[] = {0, 1, 3, 4, 7, 8, 9, 15, 16, 17, 31, 64, 1001};

TEST(Kernels, ScalarAlwaysSupported) {
    EXPECT_TRUE(isa_supported(Isa::scalar));
    EXPECT_TRUE(isa_supported(best_isa()));
}

TEST(Kernels, AxpyMatchesScalar) {
    std::mt19937_64 rng(1);
    for (Isa isa : vector_isas()) {
        const Table& t = table_for(isa);
        for (std::size_t n : kLengths) {
            auto x = random_vec(n, rng);
            auto y = random_vec(n, rng);
            auto y_ref = y;
            scalar::axpy(0.75, x.data(), y_ref.data(), n);
            t.axpy(0.75, x.data(), y.data(), n);
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], y_ref[i], 4e-16 * (1 + std::fabs(y_ref[i])));
        }
    }
}

TEST(Kernels, DotMatchesScalar) {
    std::mt19937_64 rng(2);
    for (Isa isa : vector_isas()) {
        const Table& t = table_for(isa);
        for (std::size_t n : kLengths) {
            auto x = random_vec(n, rng);
            auto y = random_vec(n, rng);
            double abs_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) abs_sum += std::fabs(x[i] * y[i]);
            EXPECT_NEAR(t.dot(x.data(), y.data(), n), scalar::dot(x.data(), y.data(), n), 1e-15 * (1 + abs_sum));
        }
    }
}

TEST(Kernels, ScaleIsBitExact) {
    std::mt19937_64 rng(3);
    for (Isa isa : vector_isas()) {
        const Table& t = table_for(isa);
        for (std::size_t n : kLengths) {
            auto x = random_vec(n, rng);
            auto ref = x;
            scalar::scale(-1.25, ref.data(), n);
            t.scale(-1.25, x.data(), n);
            EXPECT_EQ(x, ref);
        }
    }
}

TEST(Kernels, MaxEntryFirstOccurrence) {
    std::mt19937_64 rng(4);
    for (Isa isa : vector_isas()) {
        const Table& t = table_for(isa);
        for (std::size_t n : kLengths) {
            if (n == 0) continue;
            auto x = random_vec(n, rng);
            // plant a duplicated maximum to pin the tie rule
            if (n > 5) x[n - 1] = x[2] = 10.0;
            const auto ref = scalar::max_entry(x.data(), n);
            const auto got = t.max_entry(x.data(), n);
            EXPECT_EQ(got.value, ref.value);
            EXPECT_EQ(got.index, ref.index);
            EXPECT_EQ(t.max_abs(x.data(), n), scalar::max_abs(x.data(), n));
        }
    }
}

TEST(Kernels, SetIsaSwitchesActiveTable) {
    const Isa before = active_isa();
    ASSERT_TRUE(set_isa(Isa::scalar));
    EXPECT_EQ(active_isa(), Isa::scalar);
    std::vector<double> x{1, 2, 3}, y{1, 1, 1};
    axpy(2.0, x, y);
    EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));
    set_isa(before);
    EXPECT_EQ(active_isa(), before);
}

}  // namespace
}  // namespace invcone::kernels
