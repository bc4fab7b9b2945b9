#include "ttwopt/tensor.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "parallel.hpp"

namespace ttwopt {

Shape::Shape(std::vector<index_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("Shape: needs at least one mode");
    count_ = 1;
    for (index_t d : dims_) {
        if (d < 1) throw std::invalid_argument("Shape: every dim must be >= 1");
        if (count_ > std::numeric_limits<index_t>::max() / d)
            throw std::invalid_argument("Shape: element count overflows");
        count_ *= d;
    }
}

Shape::Shape(std::initializer_list<index_t> dims) : Shape(std::vector<index_t>(dims)) {}

index_t Shape::dim(index_t n) const {
    if (n < 1 || n > order()) throw std::out_of_range("Shape::dim: mode out of range");
    return dims_[static_cast<std::size_t>(n - 1)];
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ")";
    return os.str();
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), values_(static_cast<std::size_t>(shape_.count()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<index_t>(values_.size()) != shape_.count())
        throw std::invalid_argument("DenseTensor: buffer length " +
                                    std::to_string(values_.size()) +
                                    " does not match shape " + shape_.str());
}

DenseTensor DenseTensor::constant(Shape shape, double value) {
    DenseTensor t(std::move(shape));
    std::fill(t.values_.begin(), t.values_.end(), value);
    return t;
}

index_t DenseTensor::offset(const std::vector<index_t>& index) const {
    if (static_cast<index_t>(index.size()) != order())
        throw std::invalid_argument("DenseTensor: index arity does not match order");
    index_t off = 0;
    index_t stride = 1;
    for (index_t n = 0; n < order(); ++n) {
        index_t i = index[static_cast<std::size_t>(n)];
        index_t dim = shape_.dims()[static_cast<std::size_t>(n)];
        if (i < 1 || i > dim) throw std::out_of_range("DenseTensor: index out of range");
        off += (i - 1) * stride;
        stride *= dim;
    }
    return off;
}

double DenseTensor::at(const std::vector<index_t>& index) const { return values_[static_cast<std::size_t>(offset(index))]; }
double& DenseTensor::at(const std::vector<index_t>& index) { return values_[static_cast<std::size_t>(offset(index))]; }

Matrix unfold(const DenseTensor& t, index_t n) {
    const Shape& shape = t.shape();
    if (n < 1 || n > shape.order()) throw std::out_of_range("unfold: mode out of range");
    const index_t rows = shape.dim(n);
    const index_t cols = shape.count() / rows;
    // stride of mode n; modes below n occupy the low "digits" of the flat
    // offset, modes above n the high ones, so the column index of the
    // remaining modes is low + high * below.
    index_t below = 1;
    for (index_t m = 1; m < n; ++m) below *= shape.dim(m);
    Matrix out(rows, cols);
    const double* src = t.data();
    double* dst = out.data();
    const index_t total = shape.count();
    const index_t block = below * rows;
    for (index_t off = 0; off < total; ++off) {
        const index_t low = off % below;
        const index_t row = (off / below) % rows;
        const index_t high = off / block;
        dst[row + (low + high * below) * rows] = src[off];
    }
    return out;
}

DenseTensor fold(const Matrix& m, index_t n, const Shape& shape) {
    if (n < 1 || n > shape.order()) throw std::out_of_range("fold: mode out of range");
    const index_t rows = shape.dim(n);
    const index_t cols = shape.count() / rows;
    if (m.rows() != rows || m.cols() != cols)
        throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected " +
                                    std::to_string(rows) + "x" + std::to_string(cols) +
                                    " for shape " + shape.str());
    index_t below = 1;
    for (index_t k = 1; k < n; ++k) below *= shape.dim(k);
    DenseTensor out(shape);
    const double* src = m.data();
    double* dst = out.data();
    const index_t total = shape.count();
    const index_t block = below * rows;
    for (index_t off = 0; off < total; ++off) {
        const index_t low = off % below;
        const index_t row = (off / below) % rows;
        const index_t high = off / block;
        dst[off] = src[row + (low + high * below) * rows];
    }
    return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument("hadamard: shape mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
    DenseTensor out(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    parallel_for(a.size(), [&](index_t lo, index_t hi) {
        for (index_t i = lo; i < hi; ++i) po[i] = pa[i] * pb[i];
    });
    return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument("inner: shape mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
    // sequential reduction, deterministic across runs and thread settings
    const double* pa = a.data();
    const double* pb = b.data();
    double acc = 0.0;
    for (index_t i = 0, n = a.size(); i < n; ++i) acc += pa[i] * pb[i];
    return acc;
}

double norm(const DenseTensor& a) { return std::sqrt(inner(a, a)); }

DenseTensor permute(const DenseTensor& t, const std::vector<index_t>& order) {
    const index_t n = t.order();
    if (static_cast<index_t>(order.size()) != n)
        throw std::invalid_argument("permute: order arity does not match tensor order");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (index_t o : order) {
        if (o < 1 || o > n || seen[static_cast<std::size_t>(o - 1)])
            throw std::invalid_argument("permute: order is not a permutation of 1..N");
        seen[static_cast<std::size_t>(o - 1)] = true;
    }

    std::vector<index_t> src_strides(static_cast<std::size_t>(n));
    index_t stride = 1;
    for (index_t m = 0; m < n; ++m) {
        src_strides[static_cast<std::size_t>(m)] = stride;
        stride *= t.shape().dims()[static_cast<std::size_t>(m)];
    }

    std::vector<index_t> new_dims(static_cast<std::size_t>(n));
    std::vector<index_t> gather_stride(static_cast<std::size_t>(n));
    for (index_t k = 0; k < n; ++k) {
        const index_t src_mode = order[static_cast<std::size_t>(k)] - 1;
        new_dims[static_cast<std::size_t>(k)] = t.shape().dims()[static_cast<std::size_t>(src_mode)];
        gather_stride[static_cast<std::size_t>(k)] = src_strides[static_cast<std::size_t>(src_mode)];
    }

    DenseTensor out((Shape(new_dims)));
    const double* src = t.data();
    double* dst = out.data();
    // odometer over the destination index; src_off tracks the gathered offset
    std::vector<index_t> counter(static_cast<std::size_t>(n), 0);
    index_t src_off = 0;
    const index_t total = t.size();
    for (index_t d = 0; d < total; ++d) {
        dst[d] = src[src_off];
        for (index_t k = 0; k < n; ++k) {
            auto ku = static_cast<std::size_t>(k);
            src_off += gather_stride[ku];
            if (++counter[ku] < new_dims[ku]) break;
            src_off -= gather_stride[ku] * new_dims[ku];
            counter[ku] = 0;
        }
    }
    return out;
}

std::vector<index_t> inverse_permutation(const std::vector<index_t>& order) {
    std::vector<index_t> inv(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        inv[static_cast<std::size_t>(order[k] - 1)] = static_cast<index_t>(k + 1);
    return inv;
}

DenseTensor reshape(const DenseTensor& t, Shape newshape) {
    if (newshape.count() != t.size())
        throw std::invalid_argument("reshape: element count mismatch " + t.shape().str() +
                                    " -> " + newshape.str());
    return DenseTensor(std::move(newshape), t.values());
}

}  // namespace ttwopt
