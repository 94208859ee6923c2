#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <lincov/errors.hpp>
#include <lincov/estimate.hpp>
#include <lincov/io.hpp>
#include <lincov/model.hpp>
#include <lincov/rmt.hpp>
#include <lincov/simulate.hpp>
#include <lincov/symmetric_matrix.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitHypothesis = 3;

std::vector<long> parse_long_list(const std::string& text) {
    std::vector<long> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string cell =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stol(cell, &used));
            if (used != cell.size()) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw lincov::ParseError("bad integer list entry '" + cell + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        std::string cell =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (cell == "inf" || cell == "Inf" || cell == "INF") {
            out.push_back(std::numeric_limits<double>::infinity());
        } else {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument("junk");
            } catch (const std::exception&) {
                throw lincov::ParseError("bad numeric list entry '" + cell + "'");
            }
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

lincov::ParameterVector parse_param_vector(const std::string& text) {
    const std::vector<double> vals = parse_double_list(text);
    lincov::ParameterVector v(static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
    return v;
}

std::string default_output_name(const std::string& experiment) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_buf{};
    localtime_r(&now, &tm_buf);
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_buf);
    return experiment + "_" + stamp + ".csv";
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw lincov::Error("cannot open output file: " + out_path);
    out << text;
}

void print_bound(double value) {
    if (value < 0.0) {
        std::printf("0 (vacuous)\n");
    } else if (value > 1.0) {
        std::printf("1 (vacuous)\n");
    } else {
        std::printf("%.10g\n", value);
    }
}

struct FitArgs {
    std::string model_path;
    std::string data_path;
    std::string cov_path;
    long n = 0;
    std::string init = "lse";
    std::string init_file;
    std::string out_path;
    lincov::NewtonOptions opts;
};

int run_fit(const FitArgs& args) {
    const lincov::LinearCovarianceModel model = lincov::load_model_json(args.model_path);

    std::optional<lincov::SampleCovariance> sample;
    if (!args.data_path.empty()) {
        sample = lincov::sample_covariance(lincov::read_data_csv(args.data_path));
    } else {
        if (args.n < 2) throw lincov::InvalidRange("--cov needs --n >= 2");
        sample.emplace(lincov::read_matrix_csv(args.cov_path), args.n);
    }
    if (sample->dim() != model.dim())
        throw lincov::DimensionMismatch("data dimension does not match the model");
    if (!sample->S.is_positive_definite())
        throw lincov::SingularSample("sample covariance is singular (need n > p in general)");

    lincov::ParameterVector init;
    if (args.init == "lse") {
        init = lincov::least_squares(model, *sample);
        if (!model.is_in_theta(init))
            throw lincov::NotPositiveDefinite(
                "least-squares start is not positive definite; try --init safe");
    } else if (args.init == "safe") {
        init = lincov::safe_init(model, *sample);
    } else {
        if (args.init_file.empty())
            throw lincov::ParseError("--init file requires --init-file");
        const Eigen::MatrixXd raw = lincov::read_data_csv(args.init_file);
        if (raw.rows() != 1 || raw.cols() != model.size())
            throw lincov::ParseError("--init-file must hold one row of r values");
        init = raw.row(0).transpose();
    }

    const lincov::FitResult fit = lincov::newton_raphson_mle(model, *sample, init, args.opts);
    emit(lincov::fit_result_json(fit) + "\n", args.out_path);
    std::fprintf(stderr, "%s after %d iteration(s), loglik %.10g\n",
                 fit.converged ? "converged" : "NOT converged", fit.iterations, fit.loglik);
    return fit.converged ? kExitOk : kExitNoConvergence;
}

struct SimArgs {
    std::string experiment;
    int p = 0;
    std::string n_grid_text;
    long reps = -1;
    lincov::Seed seed = 12345;
    std::string out_path;
    std::string model_path;
    std::string family = "star";
    std::vector<std::string> vstar_texts;
    std::string sigma_star_path;
    int steps = 10;
    std::string d_list_text = "1,2,5,10,inf";
};

int run_simulate(const SimArgs& args) {
    std::vector<long> n_grid;
    if (!args.n_grid_text.empty()) {
        n_grid = parse_long_list(args.n_grid_text);
    } else if (args.experiment == "newton-paths") {
        n_grid = {10, 50, 100};
    } else if (args.experiment == "losses") {
        n_grid = {100, 200, 500, 1000};
    } else {
        throw lincov::InvalidRange("--n-grid is required for this experiment");
    }

    lincov::ExperimentReport report;
    if (args.experiment == "mineig") {
        if (args.p < 1) throw lincov::InvalidRange("--p is required");
        const long reps = args.reps < 0 ? 10000 : args.reps;
        report = lincov::experiment_min_eigenvalue(args.p, n_grid, reps, args.seed);
    } else if (args.experiment == "lse-region") {
        const long reps = args.reps < 0 ? 10000 : args.reps;
        if (!args.model_path.empty()) {
            const auto model = lincov::load_model_json(args.model_path);
            if (args.vstar_texts.size() != 1)
                throw lincov::InvalidRange("lse-region with --model needs exactly one --vstar");
            report = lincov::experiment_lse_region(
                model, parse_param_vector(args.vstar_texts[0]), n_grid, reps, args.seed);
        } else {
            if (args.p < 1) throw lincov::InvalidRange("--p is required");
            const auto model = lincov::brownian_tree_model(lincov::star_tree(args.p));
            lincov::ParameterVector v_star(args.p + 1);
            for (int i = 0; i < args.p; ++i) v_star(i) = i + 1;  // leaf branch i has length i+1
            v_star(args.p) = 1.0;                                // root branch
            if (!args.vstar_texts.empty()) {
                if (args.vstar_texts.size() != 1)
                    throw lincov::InvalidRange("lse-region needs exactly one --vstar");
                v_star = parse_param_vector(args.vstar_texts[0]);
            }
            report = lincov::experiment_lse_region(model, v_star, n_grid, reps, args.seed);
        }
    } else if (args.experiment == "newton-paths") {
        if (args.sigma_star_path.empty())
            throw lincov::InvalidRange("newton-paths needs --sigma-star (correlation matrix CSV)");
        const lincov::SymmetricMatrix sigma_star = lincov::read_matrix_csv(args.sigma_star_path);
        const long reps = args.reps < 0 ? 50 : args.reps;
        report = lincov::experiment_newton_paths(sigma_star.dim(), sigma_star, n_grid, reps,
                                                 args.steps, args.seed);
    } else if (args.experiment == "losses") {
        const long reps = args.reps < 0 ? 1000 : args.reps;
        std::vector<lincov::ParameterVector> v_stars;
        for (const auto& text : args.vstar_texts) v_stars.push_back(parse_param_vector(text));
        if (!args.model_path.empty()) {
            const auto model = lincov::load_model_json(args.model_path);
            if (v_stars.empty()) throw lincov::InvalidRange("losses with --model needs --vstar");
            report = lincov::experiment_losses(model, v_stars, n_grid, reps, args.seed);
        } else {
            if (args.family != "circular")
                throw lincov::InvalidRange("losses supports --family circular or --model");
            if (args.p < 3) throw lincov::InvalidRange("--p >= 3 is required");
            const auto model = lincov::circular_serial_model(args.p);
            if (v_stars.empty()) {
                v_stars.push_back(parse_param_vector("1,0.3"));
                v_stars.push_back(parse_param_vector("1,0.45"));
            }
            report = lincov::experiment_losses(model, v_stars, n_grid, reps, args.seed);
        }
    } else if (args.experiment == "t-robustness") {
        if (args.p < 1) throw lincov::InvalidRange("--p is required");
        const long reps = args.reps < 0 ? 10000 : args.reps;
        report = lincov::experiment_t_robustness(args.p, parse_double_list(args.d_list_text),
                                                 n_grid, reps, args.seed);
    } else {
        throw lincov::InvalidRange("unknown experiment: " + args.experiment);
    }

    const std::string out_path =
        args.out_path.empty() ? default_output_name(report.experiment) : args.out_path;
    report.write_csv(out_path);
    std::fprintf(stderr, "wrote %zu rows to %s\n", report.rows.size(), out_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear covariance model estimation and diagnostics"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Maximum likelihood fit, JSON result on stdout");
    fit->add_option("--model", fit_args.model_path, "model spec (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* data_opt =
        fit->add_option("--data", fit_args.data_path, "observations CSV, one row per sample")
            ->check(CLI::ExistingFile);
    auto* cov_opt =
        fit->add_option("--cov", fit_args.cov_path, "sample covariance CSV (needs --n)")
            ->check(CLI::ExistingFile);
    fit->add_option("--n", fit_args.n, "sample size behind --cov");
    data_opt->excludes(cov_opt);
    cov_opt->excludes(data_opt);
    fit->add_option("--init", fit_args.init, "starting point rule")
        ->check(CLI::IsMember({"lse", "safe", "file"}))
        ->capture_default_str();
    fit->add_option("--init-file", fit_args.init_file, "CSV row of parameter values")
        ->check(CLI::ExistingFile);
    fit->add_option("--max-iter", fit_args.opts.max_iterations)->capture_default_str();
    fit->add_option("--grad-tol", fit_args.opts.gradient_tol)->capture_default_str();
    fit->add_option("--step-shrink", fit_args.opts.step_shrink)->capture_default_str();
    fit->add_option("--min-step", fit_args.opts.min_step)->capture_default_str();
    fit->add_option("--loglik-tol", fit_args.opts.loglik_tol)->capture_default_str();
    fit->add_option("--out", fit_args.out_path, "write JSON here instead of stdout");

    int min_n_p = 0;
    double min_n_level = 0.95;
    auto* min_n = app.add_subcommand("min-n", "Smallest n with region probability above level");
    min_n->add_option("--p", min_n_p, "matrix dimension")->required();
    min_n->add_option("--level", min_n_level)->capture_default_str();

    long prob_n = 0;
    int prob_p = 0;
    std::string prob_bound = "tw";
    double prob_kappa = 1.0;
    auto* prob = app.add_subcommand("prob", "Region probability or lower bound");
    prob->add_option("--n", prob_n, "sample size")->required();
    prob->add_option("--p", prob_p, "matrix dimension")->required();
    prob->add_option("--bound", prob_bound, "tw: true-matrix approximation; mle/lse: bounds")
        ->check(CLI::IsMember({"tw", "mle", "lse"}))
        ->capture_default_str();
    prob->add_option("--kappa", prob_kappa, "condition number of the truth (lse bound)")
        ->capture_default_str();

    SimArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment, CSV output");
    sim->add_option("--experiment", sim_args.experiment)
        ->required()
        ->check(CLI::IsMember({"mineig", "lse-region", "newton-paths", "losses", "t-robustness"}));
    sim->add_option("--p", sim_args.p, "matrix dimension / leaf count");
    sim->add_option("--n-grid", sim_args.n_grid_text, "comma-separated sample sizes");
    sim->add_option("--reps", sim_args.reps, "replications (per-experiment default)");
    sim->add_option("--seed", sim_args.seed, "RNG seed")
        ->envname("LINCOV_SEED")
        ->capture_default_str();
    sim->add_option("--out", sim_args.out_path, "output CSV path (default <experiment>_<stamp>.csv)");
    sim->add_option("--model", sim_args.model_path, "model spec (JSON)")->check(CLI::ExistingFile);
    sim->add_option("--family", sim_args.family, "built-in family (star | circular)")
        ->check(CLI::IsMember({"star", "circular"}))
        ->capture_default_str();
    sim->add_option("--vstar", sim_args.vstar_texts,
                    "true parameters, comma-separated (repeatable)");
    sim->add_option("--sigma-star", sim_args.sigma_star_path,
                    "true correlation matrix CSV (newton-paths)")
        ->check(CLI::ExistingFile);
    sim->add_option("--steps", sim_args.steps, "Newton steps per path")->capture_default_str();
    sim->add_option("--d-list", sim_args.d_list_text, "t degrees of freedom, 'inf' for Gaussian")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit->parsed()) {
            if (fit_args.data_path.empty() && fit_args.cov_path.empty())
                throw lincov::InvalidRange("fit needs --data or --cov");
            return run_fit(fit_args);
        }
        if (min_n->parsed()) {
            std::printf("%ld\n", lincov::min_sample_size(min_n_p, min_n_level));
            return kExitOk;
        }
        if (prob->parsed()) {
            if (prob_bound == "tw") {
                print_bound(lincov::prob_true_in_region(prob_n, prob_p));
            } else if (prob_bound == "mle") {
                print_bound(lincov::mle_region_lower_bound(prob_n, prob_p).exact);
            } else {
                print_bound(lincov::lse_region_lower_bound(prob_n, prob_p, prob_kappa));
            }
            return kExitOk;
        }
        return run_simulate(sim_args);
    } catch (const lincov::HypothesisViolated& e) {
        std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
        return kExitHypothesis;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}
