#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ttwopt {

/// Dense matrices are column-major (row index fastest), matching the
/// colexicographic tensor layout below.
using Matrix = Eigen::MatrixXd;

using index_t = std::int64_t;

/// Dimensions (I_1, ..., I_N) of an N-way tensor, N >= 1, every I_n >= 1.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<index_t> dims);
    Shape(std::initializer_list<index_t> dims);

    index_t order() const { return static_cast<index_t>(dims_.size()); }
    /// Size of mode n, 1-based.
    index_t dim(index_t n) const;
    /// Total element count, product of all dims.
    index_t count() const { return count_; }
    const std::vector<index_t>& dims() const { return dims_; }

    bool operator==(const Shape& other) const { return dims_ == other.dims_; }
    bool operator!=(const Shape& other) const { return !(*this == other); }

    std::string str() const;

private:
    std::vector<index_t> dims_;
    index_t count_ = 0;
};

/// Dense N-way tensor of doubles in colexicographic order: the first index
/// varies fastest, element (i_1,...,i_N) (1-based) lives at flat offset
/// sum_n (i_n - 1) * prod_{m<n} I_m.
class DenseTensor {
public:
    DenseTensor() = default;
    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> values);

    static DenseTensor constant(Shape shape, double value);
    static DenseTensor zeros(Shape shape) { return DenseTensor(std::move(shape)); }
    static DenseTensor ones(Shape shape) { return constant(std::move(shape), 1.0); }

    const Shape& shape() const { return shape_; }
    index_t order() const { return shape_.order(); }
    index_t size() const { return static_cast<index_t>(values_.size()); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }

    double operator[](index_t flat) const { return values_[static_cast<std::size_t>(flat)]; }
    double& operator[](index_t flat) { return values_[static_cast<std::size_t>(flat)]; }

    /// Element access by 1-based multi-index.
    double at(const std::vector<index_t>& index) const;
    double& at(const std::vector<index_t>& index);

    /// Flat offset of a 1-based multi-index.
    index_t offset(const std::vector<index_t>& index) const;

private:
    Shape shape_;
    std::vector<double> values_;
};

/// Mode-n matricization (1-based n). Rows are indexed by i_n; columns run
/// colexicographically over the remaining indices in ascending mode order,
/// so unfold(t, 1) is a plain reshape of the buffer.
Matrix unfold(const DenseTensor& t, index_t n);

/// Inverse of unfold: unfold(fold(m, n, shape), n) == m.
DenseTensor fold(const Matrix& m, index_t n, const Shape& shape);

/// Kronecker product: block (i, j) of the result is a(i, j) * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Elementwise product; shapes must match.
DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

/// Sum of elementwise products; shapes must match.
double inner(const DenseTensor& a, const DenseTensor& b);

/// Frobenius norm, sqrt(inner(a, a)).
double norm(const DenseTensor& a);

/// Reorders modes: mode order[k] of t becomes mode k of the result
/// (order is a 1-based permutation of 1..N).
DenseTensor permute(const DenseTensor& t, const std::vector<index_t>& order);

/// Inverse permutation, 1-based.
std::vector<index_t> inverse_permutation(const std::vector<index_t>& order);

/// Reinterprets the colexicographic buffer under a new shape with the same
/// element count; no data moves.
DenseTensor reshape(const DenseTensor& t, Shape newshape);

}  // namespace ttwopt
