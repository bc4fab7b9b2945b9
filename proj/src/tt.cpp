#include "ttwopt/tt.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace ttwopt {

TTCores::TTCores(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) throw std::invalid_argument("TTCores: needs at least one core");
    const index_t n_cores = static_cast<index_t>(cores_.size());
    std::vector<index_t> dims;
    ranks_.reserve(static_cast<std::size_t>(n_cores + 1));
    for (index_t n = 0; n < n_cores; ++n) {
        const DenseTensor& c = cores_[static_cast<std::size_t>(n)];
        if (c.order() != 3)
            throw std::invalid_argument("TTCores: core " + std::to_string(n + 1) +
                                        " is not 3-way, shape " + c.shape().str());
        const index_t left = c.shape().dim(1);
        const index_t mid = c.shape().dim(2);
        const index_t right = c.shape().dim(3);
        if (n == 0) {
            if (left != 1)
                throw std::invalid_argument("TTCores: first core must have leading rank 1");
            ranks_.push_back(1);
        } else if (left != ranks_.back()) {
            throw std::invalid_argument("TTCores: rank mismatch between cores " +
                                        std::to_string(n) + " and " + std::to_string(n + 1) +
                                        ": " + std::to_string(ranks_.back()) + " != " +
                                        std::to_string(left));
        }
        ranks_.push_back(right);
        dims.push_back(mid);
    }
    if (ranks_.back() != 1)
        throw std::invalid_argument("TTCores: last core must have trailing rank 1");
    shape_ = Shape(dims);
}

const DenseTensor& TTCores::core(index_t n) const {
    if (n < 1 || n > order()) throw std::out_of_range("TTCores::core: index out of range");
    return cores_[static_cast<std::size_t>(n - 1)];
}

DenseTensor& TTCores::core(index_t n) {
    if (n < 1 || n > order()) throw std::out_of_range("TTCores::core: index out of range");
    return cores_[static_cast<std::size_t>(n - 1)];
}

namespace {

// Lateral slice G^(n)[:, i, :] of a core stored colexicographically:
// rows are contiguous, columns stride by r_left * I_n.
using SliceMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

SliceMap lateral_slice(const DenseTensor& core, index_t i) {
    const index_t r_left = core.shape().dim(1);
    const index_t mid = core.shape().dim(2);
    const index_t r_right = core.shape().dim(3);
    return SliceMap(core.data() + r_left * (i - 1), r_left, r_right,
                    Eigen::OuterStride<>(r_left * mid));
}

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

}  // namespace

double eval_element(const TTCores& tt, const std::vector<index_t>& index) {
    const index_t n_modes = tt.order();
    if (static_cast<index_t>(index.size()) != n_modes)
        throw std::invalid_argument("eval_element: index arity does not match order");
    for (index_t n = 1; n <= n_modes; ++n) {
        const index_t i = index[static_cast<std::size_t>(n - 1)];
        if (i < 1 || i > tt.shape().dim(n))
            throw std::out_of_range("eval_element: index out of range at mode " +
                                    std::to_string(n));
    }
    Eigen::RowVectorXd acc = lateral_slice(tt.core(1), index[0]).row(0);
    for (index_t n = 2; n <= n_modes; ++n)
        acc = acc * lateral_slice(tt.core(n), index[static_cast<std::size_t>(n - 1)]);
    return acc(0);
}

std::vector<Matrix> detail::left_chain_matrices(const TTCores& tt) {
    const index_t n_modes = tt.order();
    std::vector<Matrix> chains;
    chains.reserve(static_cast<std::size_t>(n_modes + 1));
    chains.push_back(Matrix::Ones(1, 1));
    index_t rows = 1;
    for (index_t n = 1; n <= n_modes; ++n) {
        const DenseTensor& c = tt.core(n);
        const index_t mid = c.shape().dim(2);
        const index_t r_right = c.shape().dim(3);
        // (rows x r_left) * (r_left x mid*r_right), then the product buffer
        // reads directly as a (rows*mid) x r_right column-major matrix
        ConstMap core_mat(c.data(), tt.rank(n - 1), mid * r_right);
        Matrix prod = chains.back() * core_mat;
        chains.push_back(MutMap(prod.data(), rows * mid, r_right));
        rows *= mid;
    }
    return chains;
}

std::vector<Matrix> detail::right_chain_matrices(const TTCores& tt) {
    const index_t n_modes = tt.order();
    std::vector<Matrix> chains(static_cast<std::size_t>(n_modes + 1));
    chains[static_cast<std::size_t>(n_modes)] = Matrix::Ones(1, 1);
    index_t cols = 1;
    for (index_t n = n_modes; n >= 1; --n) {
        const DenseTensor& c = tt.core(n);
        const index_t r_left = c.shape().dim(1);
        const index_t mid = c.shape().dim(2);
        // (r_left*mid x r_right) * (r_right x cols); the product buffer reads
        // as r_left x (mid*cols) column-major
        ConstMap core_mat(c.data(), r_left * mid, tt.rank(n));
        Matrix prod = core_mat * chains[static_cast<std::size_t>(n)];
        chains[static_cast<std::size_t>(n - 1)] = MutMap(prod.data(), r_left, mid * cols);
        cols *= mid;
    }
    return chains;
}

DenseTensor full(const TTCores& tt, index_t cap) {
    if (tt.shape().count() > cap)
        throw std::invalid_argument("full: " + std::to_string(tt.shape().count()) +
                                    " elements exceed the materialization cap of " +
                                    std::to_string(cap));
    const index_t n_modes = tt.order();
    std::vector<double> cur(tt.core(1).values());
    index_t rows = tt.shape().dim(1);
    for (index_t n = 2; n <= n_modes; ++n) {
        const DenseTensor& c = tt.core(n);
        const index_t r_left = c.shape().dim(1);
        const index_t mid = c.shape().dim(2);
        const index_t r_right = c.shape().dim(3);
        std::vector<double> next(static_cast<std::size_t>(rows * mid * r_right));
        MutMap out(next.data(), rows, mid * r_right);
        out.noalias() = ConstMap(cur.data(), rows, r_left) * ConstMap(c.data(), r_left, mid * r_right);
        cur = std::move(next);
        rows *= mid;
    }
    return DenseTensor(tt.shape(), std::move(cur));
}

DenseTensor subchain_right(const TTCores& tt, index_t n) {
    const index_t n_modes = tt.order();
    if (n < 1 || n > n_modes) throw std::out_of_range("subchain_right: mode out of range");
    if (n == n_modes) return DenseTensor(Shape{1, 1}, {1.0});
    std::vector<double> cur = {1.0};
    index_t cols = 1;
    for (index_t m = n_modes; m > n; --m) {
        const DenseTensor& c = tt.core(m);
        const index_t r_left = c.shape().dim(1);
        const index_t mid = c.shape().dim(2);
        std::vector<double> next(static_cast<std::size_t>(r_left * mid * cols));
        MutMap out(next.data(), r_left * mid, cols);
        out.noalias() = ConstMap(c.data(), r_left * mid, tt.rank(m)) * ConstMap(cur.data(), tt.rank(m), cols);
        cur = std::move(next);
        cols *= mid;
    }
    std::vector<index_t> dims{tt.rank(n)};
    for (index_t m = n + 1; m <= n_modes; ++m) dims.push_back(tt.shape().dim(m));
    return DenseTensor(Shape(dims), std::move(cur));
}

DenseTensor subchain_left(const TTCores& tt, index_t n) {
    const index_t n_modes = tt.order();
    if (n < 1 || n > n_modes) throw std::out_of_range("subchain_left: mode out of range");
    if (n == 1) return DenseTensor(Shape{1, 1}, {1.0});
    std::vector<double> cur = {1.0};
    index_t rows = 1;
    for (index_t m = 1; m < n; ++m) {
        const DenseTensor& c = tt.core(m);
        const index_t mid = c.shape().dim(2);
        const index_t r_right = c.shape().dim(3);
        std::vector<double> next(static_cast<std::size_t>(rows * mid * r_right));
        MutMap out(next.data(), rows, mid * r_right);
        out.noalias() = ConstMap(cur.data(), rows, tt.rank(m - 1)) * ConstMap(c.data(), tt.rank(m - 1), mid * r_right);
        cur = std::move(next);
        rows *= mid;
    }
    std::vector<index_t> dims;
    for (index_t m = 1; m < n; ++m) dims.push_back(tt.shape().dim(m));
    dims.push_back(tt.rank(n - 1));
    return DenseTensor(Shape(dims), std::move(cur));
}

index_t num_params(const TTCores& tt) {
    index_t total = 0;
    for (index_t n = 1; n <= tt.order(); ++n) total += tt.core(n).size();
    return total;
}

}  // namespace ttwopt
