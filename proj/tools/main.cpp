#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttwopt/evaluation.hpp"
#include "ttwopt/io.hpp"
#include "ttwopt/tensor.hpp"
#include "ttwopt/tensorize.hpp"
#include "ttwopt/tt.hpp"
#include "ttwopt/wopt.hpp"

namespace {

using nlohmann::json;
using namespace ttwopt;

// A single interior value expands to the uniform chain (1, r, ..., r, 1).
std::vector<index_t> expand_ranks(std::vector<index_t> ranks, index_t order) {
    if (ranks.size() == 1) {
        const index_t r = ranks.front();
        ranks.assign(static_cast<std::size_t>(order + 1), r);
        ranks.front() = 1;
        ranks.back() = 1;
    }
    return ranks;
}

std::string format_trace_csv(const OptimizerTrace& trace) {
    std::string out = "iter,f,gnorm,step\n";
    char line[160];
    for (const TraceRecord& r : trace.records) {
        std::snprintf(line, sizeof(line), "%" PRId64 ",%.17g,%.17g,%.17g\n", r.iter, r.f,
                      r.gnorm, r.step);
        out += line;
    }
    return out;
}

json psnr_to_json(double v) {
    if (std::isinf(v)) return json("inf");
    return json(v);
}

struct GenerateArgs {
    std::vector<index_t> dims;
    index_t cp_rank = 10;
    std::uint64_t seed = 0;
    std::string output;
};

struct MaskArgs {
    double rate = 0.0;
    std::uint64_t seed = 0;
    std::string like;
    std::string output;
};

struct CompleteArgs {
    std::string data;
    std::string weights;
    std::vector<index_t> ranks;
    std::string output;
    std::string model_output;
    std::string trace_path;
    std::string method = "ncg";
    index_t max_iters = 1000;
    double rel_tol = 1e-10;
    double grad_tol = 1e-8;
    std::string init = "gaussian";
    double sigma = -1.0;  // <0 means data-driven default
    double lo = -1.0, hi = 1.0;
    std::uint64_t seed = 0;
};

struct PairArgs {
    std::string input;
    std::string output;
};

struct EvalArgs {
    std::string truth;
    std::string est;
    std::string mask;
    bool want_psnr = false;
    double peak = 255.0;
    bool psnr_missing_only = false;
    bool pretty = false;
};

struct GradcheckArgs {
    std::vector<index_t> dims;
    std::vector<index_t> ranks;
    double rate = 0.5;
    std::uint64_t seed = 0;
    double h = 1e-6;
    double threshold = 1e-4;
};

int run_generate(const GenerateArgs& a) {
    write_tensor(a.output, gen_cp_problem(a.dims, a.cp_rank, a.seed));
    return 0;
}

int run_mask(const MaskArgs& a) {
    const DenseTensor like = read_tensor(a.like);
    write_tensor(a.output, gen_mask(like.shape().dims(), a.rate, a.seed));
    return 0;
}

int run_complete(const CompleteArgs& a) {
    ObservedProblem problem(read_tensor(a.data), read_tensor(a.weights));

    OptimizerConfig config;
    config.method = a.method == "gd" ? OptimMethod::GradientDescent
                                     : OptimMethod::ConjugateGradient;
    config.max_iters = a.max_iters;
    config.rel_tol = a.rel_tol;
    config.grad_tol = a.grad_tol;
    config.seed = a.seed;
    if (a.init == "uniform") {
        config.init = InitScheme::uniform(a.lo, a.hi);
    } else {
        config.init = InitScheme::gaussian(a.sigma >= 0.0 ? std::optional<double>(a.sigma)
                                                          : std::nullopt);
    }

    const std::vector<index_t> ranks = expand_ranks(a.ranks, problem.shape().order());
    auto [cores, trace] = optimize(problem, ranks, config);
    if (trace.termination == Termination::Diverged ||
        trace.termination == Termination::ZeroGradient)
        throw std::runtime_error("optimization failed: " + termination_name(trace.termination));

    write_tensor(a.output, complete(problem, cores));
    if (!a.model_output.empty()) write_tensor(a.model_output, full(cores));
    if (!a.trace_path.empty()) write_text(a.trace_path, format_trace_csv(trace));

    json summary{{"iterations", trace.records.size()},
                 {"f", trace.final_f()},
                 {"termination", termination_name(trace.termination)}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_tensorize(const PairArgs& a) {
    const DenseTensor img = read_ppm(a.input);
    const TensorizationPlan plan =
        make_plan(img.shape().dim(1), img.shape().dim(2), img.shape().dim(3));
    write_tensor(a.output, tensorize(img, plan));
    return 0;
}

int run_detensorize(const PairArgs& a) {
    const DenseTensor t = read_tensor(a.input);
    // stage2 is (4,...,4,C): k spatial modes of size 4 and the channel mode
    const index_t k = t.order() - 1;
    if (k < 1) throw std::runtime_error("detensorize: input is not a block tensor");
    for (index_t n = 1; n <= k; ++n)
        if (t.shape().dim(n) != 4)
            throw std::runtime_error("detensorize: input is not a block tensor (mode " +
                                     std::to_string(n) + " is not 4)");
    const index_t side = index_t{1} << k;
    const TensorizationPlan plan = make_plan(side, side, t.shape().dim(k + 1));
    write_ppm(a.output, detensorize(t, plan));
    return 0;
}

int run_eval(const EvalArgs& a) {
    const DenseTensor truth = read_tensor(a.truth);
    const DenseTensor est = read_tensor(a.est);

    MetricReport report;
    report.rse = rse(truth, est);
    report.n_observed = truth.size();
    report.n_missing = 0;

    std::optional<DenseTensor> mask;
    if (!a.mask.empty()) {
        mask = read_tensor(a.mask);
        if (mask->shape() != truth.shape())
            throw std::runtime_error("eval: mask shape does not match truth");
        index_t observed = 0;
        for (index_t i = 0; i < mask->size(); ++i)
            if ((*mask)[i] != 0.0) ++observed;
        report.n_observed = observed;
        report.n_missing = mask->size() - observed;
    }
    if (a.psnr_missing_only && !mask)
        throw std::runtime_error("eval: --psnr-missing-only needs --mask");
    if (a.want_psnr || a.psnr_missing_only)
        report.psnr = a.psnr_missing_only ? psnr_over_missing(truth, est, *mask, a.peak)
                                          : psnr(truth, est, a.peak);

    if (a.pretty) {
        std::printf("rse         %.6g\n", report.rse);
        if (report.psnr) std::printf("psnr (dB)   %.6g\n", *report.psnr);
        std::printf("observed    %" PRId64 "\n", report.n_observed);
        std::printf("missing     %" PRId64 "\n", report.n_missing);
        return 0;
    }
    json out{{"rse", report.rse},
             {"n_observed", report.n_observed},
             {"n_missing", report.n_missing}};
    if (report.psnr) out["psnr"] = psnr_to_json(*report.psnr);
    std::cout << out.dump() << "\n";
    return 0;
}

int run_gradcheck(const GradcheckArgs& a) {
    // sub-seeds: data, mask, cores
    const Shape shape(a.dims);
    DenseTensor x(shape);
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& v : x.values()) v = dist(rng);

    ObservedProblem problem(std::move(x), gen_mask(a.dims, a.rate, a.seed + 1));

    OptimizerConfig config;
    config.init = InitScheme::gaussian(1.0);
    config.seed = a.seed + 2;
    const TTCores cores =
        init_cores(shape, expand_ranks(a.ranks, shape.order()), config);

    const GradientSet analytic = gradient(problem, cores);
    const GradientSet numeric = finite_diff_gradient(problem, cores, a.h);
    const double err = max_rel_error(analytic, numeric);

    json out{{"max_rel_error", err}, {"threshold", a.threshold}};
    std::cout << out.dump() << "\n";
    return err > a.threshold ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-train weighted optimization (TT-WOPT) for tensor completion"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto generate_args = std::make_shared<GenerateArgs>();
    CLI::App* generate = app.add_subcommand("generate", "synthesize CP-rank ground-truth data");
    generate->add_option("--dims", generate_args->dims, "tensor dimensions, e.g. 30,30,30")
        ->required()
        ->delimiter(',');
    generate->add_option("--cp-rank", generate_args->cp_rank, "CP rank of the synthetic data")
        ->check(CLI::PositiveNumber);
    generate->add_option("--seed", generate_args->seed, "RNG seed");
    generate->add_option("-o,--output", generate_args->output, "output tensor (.dten)")
        ->required();
    generate->callback([&action, generate_args] {
        action = [generate_args] { return run_generate(*generate_args); };
    });

    auto mask_args = std::make_shared<MaskArgs>();
    CLI::App* mask = app.add_subcommand("mask", "make a binary weight tensor");
    mask->add_option("--rate", mask_args->rate, "missing rate in [0,1]")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    mask->add_option("--seed", mask_args->seed, "RNG seed");
    mask->add_option("--like", mask_args->like, "tensor whose shape the mask copies")
        ->required();
    mask->add_option("-o,--output", mask_args->output, "output tensor (.dten)")->required();
    mask->callback([&action, mask_args] {
        action = [mask_args] { return run_mask(*mask_args); };
    });

    auto complete_args = std::make_shared<CompleteArgs>();
    CLI::App* complete = app.add_subcommand("complete", "fit TT cores and fill missing entries");
    complete->set_config("--config", "", "key=value config file (flags override it)");
    complete->add_option("-x,--data", complete_args->data, "observed tensor (.dten)")
        ->required();
    complete->add_option("-w,--weights", complete_args->weights, "weight tensor (.dten)")
        ->required();
    complete->add_option("--ranks", complete_args->ranks,
                         "TT-rank chain 1,r1,...,1 or one uniform interior value")
        ->required()
        ->delimiter(',');
    complete->add_option("-o,--output", complete_args->output, "completed tensor (.dten)")
        ->required();
    complete->add_option("--model-output", complete_args->model_output,
                         "also write the raw model reconstruction (.dten)");
    complete->add_option("--trace", complete_args->trace_path, "iteration trace (CSV)");
    complete->add_option("--method", complete_args->method, "optimizer")
        ->check(CLI::IsMember({"ncg", "gd"}))
        ->capture_default_str();
    complete->add_option("--max-iters", complete_args->max_iters, "iteration budget")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    complete->add_option("--rel-tol", complete_args->rel_tol, "relative objective-change stop")
        ->capture_default_str();
    complete->add_option("--grad-tol", complete_args->grad_tol,
                         "gradient-norm-per-parameter stop")
        ->capture_default_str();
    complete->add_option("--init", complete_args->init, "core init scheme")
        ->check(CLI::IsMember({"gaussian", "uniform"}))
        ->capture_default_str();
    complete->add_option("--sigma", complete_args->sigma,
                         "gaussian init std (omit for a data-driven scale)");
    complete->add_option("--lo", complete_args->lo, "uniform init lower bound")
        ->capture_default_str();
    complete->add_option("--hi", complete_args->hi, "uniform init upper bound")
        ->capture_default_str();
    complete->add_option("--seed", complete_args->seed, "RNG seed");
    complete->callback([&action, complete_args] {
        action = [complete_args] { return run_complete(*complete_args); };
    });

    auto tensorize_args = std::make_shared<PairArgs>();
    CLI::App* tensorize_cmd =
        app.add_subcommand("tensorize", "image (PPM) -> high-order block tensor");
    tensorize_cmd->add_option("-i,--input", tensorize_args->input, "input image (P6 PPM)")
        ->required();
    tensorize_cmd->add_option("-o,--output", tensorize_args->output, "output tensor (.dten)")
        ->required();
    tensorize_cmd->callback([&action, tensorize_args] {
        action = [tensorize_args] { return run_tensorize(*tensorize_args); };
    });

    auto detensorize_args = std::make_shared<PairArgs>();
    CLI::App* detensorize_cmd =
        app.add_subcommand("detensorize", "block tensor -> image (PPM)");
    detensorize_cmd->add_option("-i,--input", detensorize_args->input, "input tensor (.dten)")
        ->required();
    detensorize_cmd->add_option("-o,--output", detensorize_args->output, "output image (P6 PPM)")
        ->required();
    detensorize_cmd->callback([&action, detensorize_args] {
        action = [detensorize_args] { return run_detensorize(*detensorize_args); };
    });

    auto eval_args = std::make_shared<EvalArgs>();
    CLI::App* eval = app.add_subcommand("eval", "compare an estimate against ground truth");
    eval->add_option("--truth", eval_args->truth, "ground-truth tensor (.dten)")->required();
    eval->add_option("--est", eval_args->est, "estimate tensor (.dten)")->required();
    eval->add_option("--mask", eval_args->mask, "weight tensor for observed/missing counts");
    eval->add_flag("--psnr", eval_args->want_psnr, "also report PSNR");
    eval->add_option("--peak", eval_args->peak, "PSNR peak value")->capture_default_str();
    eval->add_flag("--psnr-missing-only", eval_args->psnr_missing_only,
                   "PSNR over missing entries only (needs --mask)");
    eval->add_flag("--pretty", eval_args->pretty, "human-readable table instead of JSON");
    eval->callback([&action, eval_args] {
        action = [eval_args] { return run_eval(*eval_args); };
    });

    auto gradcheck_args = std::make_shared<GradcheckArgs>();
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "compare analytic gradient with finite differences");
    gradcheck->add_option("--dims", gradcheck_args->dims, "tensor dimensions")
        ->required()
        ->delimiter(',');
    gradcheck->add_option("--ranks", gradcheck_args->ranks, "TT-rank chain or uniform value")
        ->required()
        ->delimiter(',');
    gradcheck->add_option("--rate", gradcheck_args->rate, "missing rate")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gradcheck->add_option("--seed", gradcheck_args->seed, "RNG seed");
    gradcheck->add_option("--fd-step", gradcheck_args->h, "finite-difference step")
        ->capture_default_str();
    gradcheck->add_option("--threshold", gradcheck_args->threshold, "failure threshold")
        ->capture_default_str();
    gradcheck->callback([&action, gradcheck_args] {
        action = [gradcheck_args] { return run_gradcheck(*gradcheck_args); };
    });

    CLI11_PARSE(app, argc, argv);

    try {
        return action ? action() : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
