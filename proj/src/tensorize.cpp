#include "ttwopt/tensorize.hpp"

#include <stdexcept>
#include <string>

namespace ttwopt {

TensorizationPlan make_plan(index_t h, index_t w, index_t c) {
    if (h != w)
        throw std::invalid_argument("make_plan: image must be square, got " + std::to_string(h) +
                                    "x" + std::to_string(w));
    if (c < 1) throw std::invalid_argument("make_plan: channel count must be >= 1");
    index_t levels = 0;
    for (index_t v = h; v > 1; v >>= 1) {
        if (v & 1)
            throw std::invalid_argument("make_plan: spatial size " + std::to_string(h) +
                                        " is not a power of two");
        ++levels;
    }
    if (levels < 1)
        throw std::invalid_argument("make_plan: spatial size must be at least 2");

    TensorizationPlan plan;
    plan.levels = levels;
    plan.source_shape = Shape{h, w, c};

    // modes 1..k factor the row index fine-to-coarse, modes k+1..2k the
    // column index; interleave them so each output mode pairs one row bit
    // with the matching column bit
    std::vector<index_t> stage1(static_cast<std::size_t>(2 * levels), 2);
    stage1.push_back(c);
    plan.stage1_shape = Shape(stage1);

    plan.perm.reserve(static_cast<std::size_t>(2 * levels + 1));
    for (index_t j = 1; j <= levels; ++j) {
        plan.perm.push_back(j);
        plan.perm.push_back(levels + j);
    }
    plan.perm.push_back(2 * levels + 1);

    std::vector<index_t> stage2(static_cast<std::size_t>(levels), 4);
    stage2.push_back(c);
    plan.stage2_shape = Shape(stage2);
    return plan;
}

DenseTensor tensorize(const DenseTensor& img, const TensorizationPlan& plan) {
    if (img.shape() != plan.source_shape)
        throw std::invalid_argument("tensorize: image shape " + img.shape().str() +
                                    " does not match plan source " + plan.source_shape.str());
    return reshape(permute(reshape(img, plan.stage1_shape), plan.perm), plan.stage2_shape);
}

DenseTensor detensorize(const DenseTensor& t, const TensorizationPlan& plan) {
    if (t.shape() != plan.stage2_shape)
        throw std::invalid_argument("detensorize: tensor shape " + t.shape().str() +
                                    " does not match plan stage2 " + plan.stage2_shape.str());
    std::vector<index_t> permuted_dims;
    permuted_dims.reserve(plan.perm.size());
    for (index_t m : plan.perm) permuted_dims.push_back(plan.stage1_shape.dim(m));
    return reshape(permute(reshape(t, Shape(permuted_dims)), inverse_permutation(plan.perm)),
                   plan.source_shape);
}

}  // namespace ttwopt
