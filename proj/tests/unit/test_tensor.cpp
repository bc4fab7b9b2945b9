#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "ttwopt/tensor.hpp"

using namespace ttwopt;

namespace {

DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseTensor t(shape);
    for (auto& v : t.values()) v = dist(rng);
    return t;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

}  // namespace

TEST_CASE("Shape validation") {
    CHECK(Shape{2, 3, 4}.count() == 24);
    CHECK(Shape{5}.order() == 1);
    CHECK_THROWS(Shape{2, 0, 4});
    CHECK_THROWS(Shape(std::vector<index_t>{}));
}

TEST_CASE("DenseTensor layout is colexicographic") {
    // element (i1,...,iN) at offset sum (i_n - 1) * prod_{m<n} I_m
    DenseTensor t(Shape{2, 3, 4});
    CHECK(t.offset({1, 1, 1}) == 0);
    CHECK(t.offset({2, 1, 1}) == 1);
    CHECK(t.offset({1, 2, 1}) == 2);
    CHECK(t.offset({1, 1, 2}) == 6);
    CHECK(t.offset({2, 3, 4}) == 23);
    CHECK_THROWS(t.offset({3, 1, 1}));
    CHECK_THROWS(t.offset({1, 1}));
    CHECK_THROWS(DenseTensor(Shape{2, 2}, {1.0, 2.0, 3.0}));
}

TEST_CASE("unfold: 1-way degenerate case is a column") {
    DenseTensor t(Shape{3}, {1.0, 2.0, 3.0});
    Matrix m = unfold(t, 1);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 1);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(2, 0) == 3.0);
}

TEST_CASE("unfold: (2,3,4) element (2,1,3) lands at row 2, column 7") {
    DenseTensor t(Shape{2, 3, 4});
    t.at({2, 1, 3}) = 42.0;
    Matrix m = unfold(t, 1);
    // 1-based row i1 = 2, column 1 + (i2-1) + I2*(i3-1) = 1 + 0 + 3*2 = 7
    CHECK(m(2 - 1, 7 - 1) == 42.0);

    // full index-arithmetic oracle over all 24 elements and all three modes
    for (index_t off = 0; off < 24; ++off) t[off] = static_cast<double>(off);
    for (index_t n = 1; n <= 3; ++n) {
        Matrix u = unfold(t, n);
        for (index_t i1 = 1; i1 <= 2; ++i1)
            for (index_t i2 = 1; i2 <= 3; ++i2)
                for (index_t i3 = 1; i3 <= 4; ++i3) {
                    const std::vector<index_t> idx{i1, i2, i3};
                    const std::vector<index_t> dims{2, 3, 4};
                    index_t row = idx[static_cast<std::size_t>(n - 1)] - 1;
                    index_t col = 0, stride = 1;
                    for (index_t m2 = 1; m2 <= 3; ++m2) {
                        if (m2 == n) continue;
                        col += (idx[static_cast<std::size_t>(m2 - 1)] - 1) * stride;
                        stride *= dims[static_cast<std::size_t>(m2 - 1)];
                    }
                    CHECK(u(row, col) == t.at(idx));
                }
    }
    CHECK_THROWS(unfold(t, 0));
    CHECK_THROWS(unfold(t, 4));
}

TEST_CASE("unfold is a bijection of index sets") {
    DenseTensor t = random_tensor(Shape{3, 4, 2, 2}, 7);
    std::multiset<double> reference(t.values().begin(), t.values().end());
    for (index_t n = 1; n <= 4; ++n) {
        Matrix u = unfold(t, n);
        std::multiset<double> got(u.data(), u.data() + u.size());
        CHECK(got == reference);
    }
}

TEST_CASE("fold round-trips unfold for every mode") {
    DenseTensor t = random_tensor(Shape{2, 3, 4}, 11);
    for (index_t n = 1; n <= 3; ++n) {
        DenseTensor back = fold(unfold(t, n), n, t.shape());
        CHECK(back.values() == t.values());
    }
}

TEST_CASE("fold: degenerate and error cases") {
    Matrix col(3, 1);
    col << 5, 6, 7;
    DenseTensor v = fold(col, 1, Shape{3});
    CHECK(v.values() == std::vector<double>{5.0, 6.0, 7.0});

    DenseTensor z = fold(Matrix::Zero(6, 4), 1, Shape{6, 2, 2});
    for (index_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);

    CHECK_THROWS(fold(Matrix::Zero(5, 4), 1, Shape{6, 2, 2}));
    CHECK_THROWS(fold(col, 2, Shape{3}));
}

TEST_CASE("kronecker matches the definition") {
    Matrix a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 1, 1, 0;
    Matrix k = kronecker(a, b);
    Matrix expected(4, 4);
    expected << 0, 1, 0, 2,
                1, 0, 2, 0,
                0, 3, 0, 4,
                3, 0, 4, 0;
    CHECK((k - expected).cwiseAbs().maxCoeff() == 0.0);

    // identity blocks and the 1x1 case
    Matrix c = random_matrix(2, 3, 3);
    Matrix ik = kronecker(Matrix::Identity(2, 2), c);
    CHECK((ik.topLeftCorner(2, 3) - c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ik.bottomRightCorner(2, 3) - c).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ik.topRightCorner(2, 3).cwiseAbs().maxCoeff() == 0.0);

    Matrix s(1, 1);
    s << 2.0;
    CHECK((kronecker(s, c) - 2.0 * c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kronecker is bilinear and satisfies the mixed-product rule") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const double alpha = dist(rng);
    Matrix a = random_matrix(2, 2, 13), b = random_matrix(2, 2, 17);
    Matrix c = random_matrix(2, 2, 19), d = random_matrix(2, 2, 23);

    Matrix lhs = kronecker(alpha * a, b);
    Matrix rhs = alpha * kronecker(a, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-14 * rhs.cwiseAbs().maxCoeff());

    Matrix mixed = kronecker(a, b) * kronecker(c, d);
    Matrix direct = kronecker(Matrix(a * c), Matrix(b * d));
    CHECK((mixed - direct).cwiseAbs().maxCoeff() <= 1e-12 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("hadamard, inner, norm") {
    DenseTensor t = random_tensor(Shape{4, 3}, 29);
    DenseTensor ones = DenseTensor::ones(t.shape());
    DenseTensor zeros = DenseTensor::zeros(t.shape());

    CHECK(hadamard(t, ones).values() == t.values());
    for (index_t i = 0; i < t.size(); ++i) CHECK(hadamard(t, zeros)[i] == 0.0);

    DenseTensor a(Shape{3}, {1, 2, 3});
    DenseTensor b(Shape{3}, {4, 5, 6});
    CHECK(hadamard(a, b).values() == std::vector<double>{4.0, 10.0, 18.0});
    CHECK(inner(a, b) == 1.0 * 4 + 2 * 5 + 3 * 6);

    CHECK(inner(t, zeros) == 0.0);
    CHECK(inner(t, t) == doctest::Approx(norm(t) * norm(t)).epsilon(1e-12));
    CHECK(inner(DenseTensor(Shape{2}, {1, 2}), DenseTensor(Shape{2}, {3, 4})) == 11.0);

    CHECK_THROWS(hadamard(t, a));
    CHECK_THROWS(inner(t, a));
}

TEST_CASE("permute and reshape") {
    DenseTensor t = random_tensor(Shape{2, 3, 4}, 31);

    DenseTensor same = permute(t, {1, 2, 3});
    CHECK(same.values() == t.values());

    std::vector<index_t> order{3, 1, 2};
    DenseTensor p = permute(t, order);
    CHECK(p.shape() == Shape{4, 2, 3});
    for (index_t i1 = 1; i1 <= 2; ++i1)
        for (index_t i2 = 1; i2 <= 3; ++i2)
            for (index_t i3 = 1; i3 <= 4; ++i3) CHECK(p.at({i3, i1, i2}) == t.at({i1, i2, i3}));

    DenseTensor back = permute(p, inverse_permutation(order));
    CHECK(back.values() == t.values());
    CHECK(back.shape() == t.shape());

    DenseTensor r = reshape(t, Shape{6, 4});
    CHECK(r.values() == t.values());
    DenseTensor small(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(reshape(small, Shape{3, 2}).values() == small.values());

    CHECK_THROWS(permute(t, {1, 1, 2}));
    CHECK_THROWS(permute(t, {1, 2}));
    CHECK_THROWS(reshape(t, Shape{5, 5}));
}
