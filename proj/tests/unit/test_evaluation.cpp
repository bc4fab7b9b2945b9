#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ttwopt/evaluation.hpp"
#include "ttwopt/tensor.hpp"
#include "ttwopt/tt.hpp"
#include "ttwopt/wopt.hpp"

using namespace ttwopt;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseTensor t(shape);
    for (auto& v : t.values()) v = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("cp_to_dense: rank-1 outer product") {
    Matrix f1 = random_matrix(3, 1, 1), f2 = random_matrix(4, 1, 2), f3 = random_matrix(2, 1, 3);
    DenseTensor x = cp_to_dense(CPFactors({f1, f2, f3}));
    CHECK(x.shape() == Shape{3, 4, 2});
    for (index_t i = 1; i <= 3; ++i)
        for (index_t j = 1; j <= 4; ++j)
            for (index_t k = 1; k <= 2; ++k)
                CHECK(x.at({i, j, k}) ==
                      doctest::Approx(f1(i - 1, 0) * f2(j - 1, 0) * f3(k - 1, 0)).epsilon(1e-13));
}

TEST_CASE("cp_to_dense: all-ones factors give a constant tensor") {
    DenseTensor x = cp_to_dense(CPFactors({Matrix::Ones(2, 3), Matrix::Ones(4, 3)}));
    for (index_t i = 0; i < x.size(); ++i) CHECK(x[i] == 3.0);
}

TEST_CASE("cp_to_dense: two-way case is the factor matrix product") {
    Matrix f1 = random_matrix(3, 2, 4), f2 = random_matrix(5, 2, 5);
    DenseTensor x = cp_to_dense(CPFactors({f1, f2}));
    Matrix expected = f1 * f2.transpose();
    for (index_t i = 1; i <= 3; ++i)
        for (index_t j = 1; j <= 5; ++j)
            CHECK(x.at({i, j}) == doctest::Approx(expected(i - 1, j - 1)).epsilon(1e-12));
}

TEST_CASE("CPFactors validation") {
    CHECK_THROWS(CPFactors({random_matrix(3, 2, 6), random_matrix(3, 3, 7)}));
    CHECK_THROWS(CPFactors(std::vector<Matrix>{}));
}

TEST_CASE("gen_cp_problem: deterministic and the right shape") {
    DenseTensor a = gen_cp_problem({30, 30, 30}, 10, 42);
    DenseTensor b = gen_cp_problem({30, 30, 30}, 10, 42);
    CHECK(a.shape() == Shape{30, 30, 30});
    CHECK(a.values() == b.values());
    DenseTensor c = gen_cp_problem({30, 30, 30}, 10, 43);
    CHECK(a.values() != c.values());

    DenseTensor seven = gen_cp_problem({4, 4, 4, 4, 4, 4, 4}, 10, 1);
    CHECK(seven.shape().count() == 16384);
}

TEST_CASE("gen_mask: exact zero counts") {
    DenseTensor all = gen_mask({10, 10}, 0.0, 1);
    for (index_t i = 0; i < all.size(); ++i) CHECK(all[i] == 1.0);

    DenseTensor none = gen_mask({10, 10}, 1.0, 1);
    for (index_t i = 0; i < none.size(); ++i) CHECK(none[i] == 0.0);

    DenseTensor half = gen_mask({10, 10}, 0.5, 2);
    index_t zeros = 0;
    for (index_t i = 0; i < half.size(); ++i) {
        CHECK((half[i] == 0.0 || half[i] == 1.0));
        if (half[i] == 0.0) ++zeros;
    }
    CHECK(zeros == 50);

    // exact count at an awkward rate and size
    DenseTensor odd = gen_mask({7, 11}, 0.33, 3);
    index_t z2 = 0;
    for (index_t i = 0; i < odd.size(); ++i)
        if (odd[i] == 0.0) ++z2;
    CHECK(z2 == std::llround(0.33 * 77));

    DenseTensor again = gen_mask({7, 11}, 0.33, 3);
    CHECK(odd.values() == again.values());
    CHECK_THROWS(gen_mask({4, 4}, 1.5, 0));
}

TEST_CASE("rse closed forms") {
    DenseTensor x = random_tensor(Shape{4, 5}, 20);
    CHECK(rse(x, x) == 0.0);

    DenseTensor zero = DenseTensor::zeros(x.shape());
    CHECK(rse(x, zero) == doctest::Approx(1.0).epsilon(1e-15));

    DenseTensor twice(x.shape());
    for (index_t i = 0; i < x.size(); ++i) twice[i] = 2.0 * x[i];
    CHECK(rse(x, twice) == doctest::Approx(1.0).epsilon(1e-15));

    DenseTensor delta = random_tensor(x.shape(), 21);
    DenseTensor shifted(x.shape());
    for (index_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + delta[i];
    CHECK(rse(x, shifted) == doctest::Approx(norm(delta) / norm(x)).epsilon(1e-13));

    CHECK_THROWS(rse(zero, x));
    CHECK_THROWS(rse(x, DenseTensor(Shape{5, 4})));
}

TEST_CASE("psnr closed forms and monotonicity") {
    DenseTensor x = DenseTensor::constant(Shape{6, 6}, 100.0);
    DenseTensor off_by_one(x.shape());
    for (index_t i = 0; i < x.size(); ++i) off_by_one[i] = x[i] + 1.0;
    CHECK(psnr(x, off_by_one) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-13));

    CHECK(std::isinf(psnr(x, x)));

    // doubling the MSE drops PSNR by exactly 10 log10(2)
    DenseTensor off_sqrt2(x.shape());
    for (index_t i = 0; i < x.size(); ++i) off_sqrt2[i] = x[i] + std::sqrt(2.0);
    const double drop = psnr(x, off_by_one) - psnr(x, off_sqrt2);
    CHECK(drop == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));

    double prev = std::numeric_limits<double>::infinity();
    for (double e : {0.5, 1.0, 2.0, 4.0, 9.5}) {
        DenseTensor est(x.shape());
        for (index_t i = 0; i < x.size(); ++i) est[i] = x[i] + e;
        const double v = psnr(x, est);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("psnr_over_missing restricts to masked-out entries") {
    DenseTensor x = DenseTensor::constant(Shape{4}, 10.0);
    DenseTensor est(Shape{4}, {10.0, 10.0, 13.0, 14.0});
    DenseTensor w(Shape{4}, {1.0, 1.0, 0.0, 0.0});
    const double expected = 10.0 * std::log10(255.0 * 255.0 / ((9.0 + 16.0) / 2.0));
    CHECK(psnr_over_missing(x, est, w) == doctest::Approx(expected).epsilon(1e-13));
    CHECK_THROWS(psnr_over_missing(x, est, DenseTensor::ones(Shape{4})));
}

TEST_CASE("finite differences are exact on a per-parameter quadratic") {
    // N = 1: f(theta) = 1/2 sum (y_i - theta_i)^2, gradient theta_i - y_i
    DenseTensor x(Shape{4}, {1.0, -2.0, 0.5, 3.0});
    ObservedProblem p(x, DenseTensor::ones(Shape{4}));
    TTCores tt({DenseTensor(Shape{1, 4, 1}, {0.2, 0.4, 0.6, 0.8})});
    GradientSet fd = finite_diff_gradient(p, tt, 1e-6);
    for (index_t i = 0; i < 4; ++i)
        CHECK(fd.grads[0][i] == doctest::Approx(tt.core(1)[i] - x[i]).epsilon(1e-9));

    ObservedProblem masked(x, DenseTensor::zeros(Shape{4}));
    GradientSet zero = finite_diff_gradient(masked, tt, 1e-6);
    for (index_t i = 0; i < 4; ++i) CHECK(zero.grads[0][i] == 0.0);

    CHECK_THROWS(finite_diff_gradient(p, tt, 0.0));
}

TEST_CASE("finite differences agree with the analytic gradient") {
    DenseTensor x = random_tensor(Shape{3, 4, 2}, 30);
    ObservedProblem p(x, gen_mask({3, 4, 2}, 0.5, 31));
    OptimizerConfig config;
    config.init = InitScheme::gaussian(1.0);
    config.seed = 32;
    TTCores tt = init_cores(p.shape(), {1, 2, 2, 1}, config);
    CHECK(max_rel_error(gradient(p, tt), finite_diff_gradient(p, tt, 1e-6)) < 1e-5);
}
