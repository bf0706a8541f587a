#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracwrmg/fracdisc.hpp"

namespace fracwrmg::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Writes to the configured output file, or to `fallback` when none is set.
class OutputSink {
public:
    OutputSink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_)
                throw std::runtime_error("cannot open output file " + path);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

std::string grid_label(const ProblemSpec& spec) {
    const std::string s = std::to_string(spec.n + 1);
    if (spec.kind == ProblemKind::Heat1D)
        return std::to_string(spec.n + 1) + "x" + std::to_string(spec.steps);
    return s + "x" + s + "x" + std::to_string(spec.steps);
}

}  // namespace

void parse_cycle(const std::string& text, CycleConfig& cycle) {
    static const std::regex pattern(R"(^([vVwW])\(?\s*(\d+)\s*,?\s*(\d+)\s*\)?$)");
    std::smatch match;
    if (!std::regex_match(text, match, pattern))
        throw std::invalid_argument("cycle must look like v01, v11, w10 or V(1,1), got '" + text + "'");
    cycle.gamma = (match[1] == "v" || match[1] == "V") ? 1 : 2;
    cycle.pre_smooth = std::stoi(match[2]);
    cycle.post_smooth = std::stoi(match[3]);
    cycle.validate();
}

std::string cycle_label(const CycleConfig& cycle) {
    return std::string(cycle.gamma == 1 ? "V" : "W") + "(" + std::to_string(cycle.pre_smooth) + "," +
           std::to_string(cycle.post_smooth) + ")";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SolveOutcome run_problem(const ProblemSpec& spec, const HOptions& hopts, const CycleConfig& cycle) {
    const auto start = Clock::now();
    const Problem problem = make_problem(spec);
    auto h = std::make_shared<const HMatrix>(HMatrix::build(problem.mesh, spec.delta, hopts));
    const WaveformMultigrid solver(problem.grid, h, cycle);
    SolveOutcome outcome;
    outcome.setup_seconds = seconds_since(start);
    auto [u, report] = solver.solve(problem.rhs);
    outcome.report = std::move(report);
    outcome.max_error = max_error(u, sample_exact(problem));
    outcome.storage = h->storage();
    return outcome;
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
    const SolveOutcome r = run_problem(config.problem, config.hmatrix, config.cycle);
    OutputSink sink(config.output, out);
    auto& os = sink.stream();
    const auto& p = config.problem;
    if (config.format == "csv") {
        os << std::setprecision(10);
        os << "problem,delta,mesh,grid,N,M,rank,cycle,iterations,convergence_factor,converged,max_error,seconds\n";
        os << to_string(p.kind) << ',' << p.delta << ',' << to_string(p.mesh) << ',' << grid_label(p) << ',' << p.n
           << ',' << p.steps << ',' << config.hmatrix.rank << ',' << cycle_label(config.cycle) << ','
           << r.report.iterations << ',' << r.report.convergence_factor << ',' << (r.report.converged ? 1 : 0)
           << ',' << r.max_error << ',' << r.report.seconds << '\n';
    } else {
        nlohmann::json j;
        j["problem"] = to_string(p.kind);
        j["delta"] = p.delta;
        j["mesh"] = to_string(p.mesh);
        j["grid"] = grid_label(p);
        j["N"] = p.n;
        j["M"] = p.steps;
        j["rank"] = config.hmatrix.rank;
        j["leaf_size"] = config.hmatrix.leaf_size;
        j["cycle"] = cycle_label(config.cycle);
        j["tol"] = config.cycle.tol;
        j["iterations"] = r.report.iterations;
        j["converged"] = r.report.converged;
        j["convergence_factor"] = r.report.convergence_factor;
        j["residual_norms"] = r.report.residual_norms;
        j["max_error"] = r.max_error;
        j["storage"] = {{"compressed_scalars", r.storage.compressed_scalars()},
                        {"dense_equivalent_scalars", r.storage.dense_equivalent_scalars},
                        {"bytes_compressed", r.storage.bytes_compressed()},
                        {"bytes_dense_equivalent", r.storage.bytes_dense_equivalent()}};
        j["timing"] = {{"setup_seconds", r.setup_seconds}, {"solve_seconds", r.report.seconds}};
        os << j.dump(2) << '\n';
    }
    if (!r.report.converged) {
        std::cerr << "fracwrmg: no convergence after " << r.report.iterations << " iterations (residual reduction "
                  << r.report.residual_norms.back() / r.report.residual_norms.front() << ")\n";
        return kNotConverged;
    }
    return kSuccess;
}

int cmd_order_study(const RunConfig& config, std::ostream& out) {
    OutputSink sink(config.output, out);
    auto& os = sink.stream();
    std::vector<MeshKind> meshes;
    if (config.meshes == "both" || config.meshes == "graded")
        meshes.push_back(MeshKind::Graded);
    if (config.meshes == "both" || config.meshes == "uniform")
        meshes.push_back(MeshKind::Uniform);
    if (meshes.empty())
        throw std::invalid_argument("mesh selection must be graded, uniform or both");
    const std::vector<double> deltas = config.deltas.empty() ? std::vector<double>{config.problem.delta} : config.deltas;
    int status = kSuccess;
    os << "delta,mesh,N,M,E_M,log2(E_M/E_2M)\n";
    for (double delta : deltas) {
        for (MeshKind mesh : meshes) {
            ErrorStudy study;
            for (std::size_t m = config.m_min; m <= config.m_max; m *= 2) {
                ProblemSpec spec = config.problem;
                spec.delta = delta;
                spec.mesh = mesh;
                spec.steps = m;
                const SolveOutcome r = run_problem(spec, config.hmatrix, config.cycle);
                if (!r.report.converged)
                    status = kNotConverged;
                study.entries.push_back({m, r.max_error});
            }
            const auto orders = study.entries.size() >= 2 ? observed_orders(study) : std::vector<double>{};
            for (std::size_t i = 0; i < study.entries.size(); ++i) {
                os << delta << ',' << to_string(mesh) << ',' << config.problem.n << ',' << study.entries[i].steps
                   << ',' << std::setprecision(6) << study.entries[i].error << ',';
                if (i < orders.size())
                    os << std::setprecision(4) << orders[i];
                os << '\n' << std::setprecision(6);
            }
        }
    }
    return status;
}

int cmd_hmat_check(const RunConfig& config, std::ostream& out) {
    OutputSink sink(config.output, out);
    auto& os = sink.stream();
    const ProblemSpec& p = config.problem;
    if (p.steps > 4096)
        throw std::invalid_argument("hmat-check densifies the operator; use M <= 4096");
    const TemporalMesh mesh =
        p.mesh == MeshKind::Graded ? make_graded_mesh(1.0, p.steps, p.delta) : make_uniform_mesh(1.0, p.steps);
    const TimeOperatorDense dense = assemble_dense_R(mesh, p.delta);
    double max_r = 0.0;
    for (std::size_t m = 1; m <= p.steps; ++m)
        for (double v : dense.row(m))
            max_r = std::max(max_r, std::abs(v));

    const std::vector<std::size_t> ranks = config.ranks.empty() ? std::vector<std::size_t>{5, 10, 15, 20} : config.ranks;
    os << std::setprecision(6);
    os << "k,max_abs_error,max_rel_error,compressed_scalars,dense_scalars,lowrank_leaves\n";
    std::vector<double> errors;
    for (std::size_t k : ranks) {
        HOptions opts = config.hmatrix;
        opts.rank = k;
        const HMatrix h = HMatrix::build(mesh, p.delta, opts);
        const Eigen::MatrixXd approx = h.densify();
        double err = 0.0;
        h.for_each_leaf([&](const HNode& node) {
            if (node.kind() != NodeKind::LowRank)
                return;
            const auto& b = node.block;
            for (std::size_t m = b.row_lo; m <= b.row_hi; ++m)
                for (std::size_t j = b.col_lo; j <= b.col_hi; ++j)
                    err = std::max(err, std::abs(approx(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(j - 1)) -
                                                 dense(m, j)));
        });
        const auto s = h.storage();
        errors.push_back(err);
        os << k << ',' << err << ',' << err / max_r << ',' << s.compressed_scalars() << ','
           << s.dense_equivalent_scalars << ',' << s.lowrank_leaves << '\n';
    }
    if (errors.size() >= 2 && errors.front() > 0.0 && errors.back() > 0.0) {
        const double span = static_cast<double>(ranks.back()) - static_cast<double>(ranks.front());
        os << "# average error ratio per unit k: " << std::pow(errors.back() / errors.front(), 1.0 / span) << '\n';
    }

    const std::vector<std::size_t> sizes =
        config.sizes.empty() ? std::vector<std::size_t>{256, 512, 1024, 2048, 4096, 8192} : config.sizes;
    os << "\nM,k,compressed_scalars,dense_scalars,M_log2_M,compressed_per_kMlogM\n";
    std::vector<double> xs, ys;
    for (std::size_t m : sizes) {
        const TemporalMesh mm =
            p.mesh == MeshKind::Graded ? make_graded_mesh(1.0, m, p.delta) : make_uniform_mesh(1.0, m);
        const HMatrix h = HMatrix::build(mm, p.delta, config.hmatrix);
        const auto s = h.storage();
        const double mlog = static_cast<double>(m) * std::log2(static_cast<double>(m));
        xs.push_back(mlog);
        ys.push_back(static_cast<double>(s.compressed_scalars()));
        os << m << ',' << config.hmatrix.rank << ',' << s.compressed_scalars() << ',' << s.dense_equivalent_scalars
           << ',' << mlog << ',' << static_cast<double>(s.compressed_scalars()) / (config.hmatrix.rank * mlog) << '\n';
    }
    if (xs.size() >= 2)
        os << "# storage slope against M log M: " << loglog_slope(xs, ys) << '\n';
    return kSuccess;
}

int cmd_bench(const RunConfig& config, std::ostream& out) {
    OutputSink sink(config.output, out);
    auto& os = sink.stream();
    const std::vector<double> deltas = config.deltas.empty() ? std::vector<double>{config.problem.delta} : config.deltas;
    const std::vector<std::size_t> sizes =
        config.sizes.empty() ? std::vector<std::size_t>{32, 64, 128, 256} : config.sizes;
    int status = kSuccess;
    os << "problem,delta,grid,N,M,rank,cycle,iterations,convergence_factor,setup_seconds,solve_seconds\n";
    for (double delta : deltas) {
        std::vector<double> work, times;
        for (std::size_t s : sizes) {
            ProblemSpec spec = config.problem;
            spec.delta = delta;
            spec.n = s - 1;
            spec.steps = s;
            const SolveOutcome r = run_problem(spec, config.hmatrix, config.cycle);
            if (!r.report.converged)
                status = kNotConverged;
            os << to_string(spec.kind) << ',' << delta << ',' << grid_label(spec) << ',' << spec.n << ',' << spec.steps
               << ',' << config.hmatrix.rank << ',' << cycle_label(config.cycle) << ',' << r.report.iterations << ','
               << std::setprecision(4) << r.report.convergence_factor << ',' << r.setup_seconds << ','
               << r.report.seconds << '\n';
            const double m = static_cast<double>(spec.steps);
            work.push_back(static_cast<double>(spec.kind == ProblemKind::Heat1D ? spec.n : spec.n * spec.n) * m *
                           std::log2(m));
            times.push_back(r.report.seconds);
        }
        if (work.size() >= 2)
            os << "# delta=" << delta << " slope of solve time against N M log M: " << loglog_slope(work, times)
               << '\n';
    }
    return status;
}

int cmd_dump_r(const RunConfig& config, std::ostream& out) {
    OutputSink sink(config.output, out);
    const ProblemSpec& p = config.problem;
    const TemporalMesh mesh =
        p.mesh == MeshKind::Graded ? make_graded_mesh(1.0, p.steps, p.delta) : make_uniform_mesh(1.0, p.steps);
    assemble_dense_R(mesh, p.delta).write_csv(sink.stream());
    return kSuccess;
}

int cmd_hmat_dump(const RunConfig& config, std::ostream& out) {
    OutputSink sink(config.output, out);
    const ProblemSpec& p = config.problem;
    const TemporalMesh mesh =
        p.mesh == MeshKind::Graded ? make_graded_mesh(1.0, p.steps, p.delta) : make_uniform_mesh(1.0, p.steps);
    const HMatrix h = HMatrix::build(mesh, p.delta, config.hmatrix);
    h.dump(sink.stream());
    const auto s = h.storage();
    sink.stream() << "# compressed_scalars=" << s.compressed_scalars()
                  << " dense_equivalent_scalars=" << s.dense_equivalent_scalars << '\n';
    return kSuccess;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Multigrid waveform relaxation for the time-fractional heat equation on graded meshes"};
    app.set_config("--config", "", "key=value file with any of the options below");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig config;
    std::string problem = "heat1d", mesh = "graded", cycle, init = "random";
    int threads = 0;
    std::size_t fixed_n = 0;

    app.add_option("--problem", problem, "heat1d or heat2d")->check(CLI::IsMember({"heat1d", "heat2d"}));
    app.add_option("--delta", config.problem.delta, "fractional order in (0,1)")
        ->check(CLI::Validator(
            [](std::string& s) {
                const double d = std::stod(s);
                return (d > 0.0 && d < 1.0) ? std::string{} : std::string("delta must lie in (0,1)");
            },
            "(0,1)"));
    app.add_option("--n", config.problem.n, "interior spatial points per axis (N+1 a power of two)");
    app.add_option("--m", config.problem.steps, "number of time steps");
    app.add_option("--mesh", mesh, "graded or uniform")->check(CLI::IsMember({"graded", "uniform"}));
    app.add_option("--rank", config.hmatrix.rank, "Taylor terms k per low-rank block")->check(CLI::Range(1, 64));
    app.add_option("--leaf", config.hmatrix.leaf_size, "H-matrix leaf size n_min")->check(CLI::PositiveNumber);
    app.add_option("--cycle", cycle, "v01, v11, w01, ... (default v01 in 1D, v11 in 2D)");
    app.add_option("--pre", config.cycle.pre_smooth, "pre-smoothing steps");
    app.add_option("--post", config.cycle.post_smooth, "post-smoothing steps");
    app.add_option("--gamma", config.cycle.gamma, "cycle index, 1 = V, 2 = W");
    app.add_option("--coarsest", config.cycle.coarsest_n, "interior points per axis on the coarsest grid");
    app.add_option("--tol", config.cycle.tol, "relative max-norm residual reduction");
    app.add_option("--max-iter", config.cycle.max_iter, "iteration cap");
    app.add_option("--init", init, "initial guess: random or zero")->check(CLI::IsMember({"random", "zero"}));
    app.add_option("--seed", config.cycle.seed, "seed of the random initial guess");
    app.add_option("--output,-o", config.output, "output file (default stdout)");
    app.add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", threads, "worker threads (0 = runtime default)")->envname("FRACWRMG_THREADS");
    app.add_option("--deltas", config.deltas, "list of fractional orders for sweeps")->delimiter(',');
    app.add_option("--sizes", config.sizes, "sweep sizes: N+1 = M for bench, M for hmat-check storage")->delimiter(',');
    app.add_option("--ranks", config.ranks, "rank sweep for hmat-check")->delimiter(',');
    app.add_option("--meshes", config.meshes, "graded, uniform or both (order-study)");
    app.add_option("--m-min", config.m_min, "smallest M of the order study");
    app.add_option("--m-max", config.m_max, "largest M of the order study");
    app.add_option("--fixed-n", fixed_n, "bench: keep N fixed and sweep M over --sizes");

    auto* solve = app.add_subcommand("solve", "solve one problem and write the report");
    auto* order = app.add_subcommand("order-study", "max errors and observed orders over M doublings");
    auto* hcheck = app.add_subcommand("hmat-check", "low-rank error against k and storage against M log M");
    auto* bench = app.add_subcommand("bench", "solve time while doubling N and M");
    auto* dump_r = app.add_subcommand("dump-r", "write the dense L1 matrix as CSV (row,col,value)");
    auto* hdump = app.add_subcommand("hmat-dump", "print the H-matrix block tree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        config.problem.kind = parse_problem_kind(problem);
        config.problem.mesh = parse_mesh_kind(mesh);
        config.cycle.initial_guess = init == "zero" ? InitialGuess::Zero : InitialGuess::Random;
        if (cycle.empty() && app.count("--pre") == 0 && app.count("--post") == 0 && app.count("--gamma") == 0)
            cycle = config.problem.kind == ProblemKind::Heat1D ? "v01" : "v11";
        if (!cycle.empty())
            parse_cycle(cycle, config.cycle);
        config.cycle.validate();
#ifdef _OPENMP
        if (threads > 0)
            omp_set_num_threads(threads);
#endif
        if (*solve)
            return cmd_solve(config, std::cout);
        if (*order)
            return cmd_order_study(config, std::cout);
        if (*hcheck)
            return cmd_hmat_check(config, std::cout);
        if (*bench) {
            if (fixed_n > 0) {
                // sweep M at fixed N: reuse the size list as M values
                RunConfig fixed = config;
                OutputSink sink(config.output, std::cout);
                auto& os = sink.stream();
                os << "problem,delta,N,M,iterations,convergence_factor,solve_seconds\n";
                std::vector<double> work, times;
                int status = kSuccess;
                for (std::size_t m : config.sizes) {
                    ProblemSpec spec = config.problem;
                    spec.n = fixed_n;
                    spec.steps = m;
                    const SolveOutcome r = run_problem(spec, config.hmatrix, config.cycle);
                    if (!r.report.converged)
                        status = kNotConverged;
                    os << to_string(spec.kind) << ',' << spec.delta << ',' << spec.n << ',' << m << ','
                       << r.report.iterations << ',' << r.report.convergence_factor << ',' << r.report.seconds << '\n';
                    work.push_back(static_cast<double>(m) * std::log2(static_cast<double>(m)));
                    times.push_back(r.report.seconds);
                }
                if (work.size() >= 2)
                    os << "# slope of solve time against M log M: " << loglog_slope(work, times) << '\n';
                return status;
            }
            return cmd_bench(config, std::cout);
        }
        if (*dump_r)
            return cmd_dump_r(config, std::cout);
        if (*hdump)
            return cmd_hmat_dump(config, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "fracwrmg: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "fracwrmg: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}

}  // namespace fracwrmg::cli
