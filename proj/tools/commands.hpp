#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracwrmg/multigrid.hpp"
#include "fracwrmg/problem.hpp"

namespace fracwrmg::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNotConverged = 3 };

struct RunConfig {
    ProblemSpec problem;
    HOptions hmatrix;
    CycleConfig cycle;
    std::string output;
    std::string format = "json";

    // sweeps
    std::vector<double> deltas;
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> ranks;
    std::string meshes = "both";
    std::size_t m_min = 32;
    std::size_t m_max = 512;
};

/// "v01", "V(1,1)", "w11" -> pre/post/gamma.
void parse_cycle(const std::string& text, CycleConfig& cycle);
std::string cycle_label(const CycleConfig& cycle);

struct SolveOutcome {
    SolveReport report;
    double max_error = 0.0;
    StorageReport storage;
    double setup_seconds = 0.0;
};

SolveOutcome run_problem(const ProblemSpec& spec, const HOptions& hopts, const CycleConfig& cycle);

int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_order_study(const RunConfig& config, std::ostream& out);
int cmd_hmat_check(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, std::ostream& out);
int cmd_dump_r(const RunConfig& config, std::ostream& out);
int cmd_hmat_dump(const RunConfig& config, std::ostream& out);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Parses argv, dispatches the subcommand and returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace fracwrmg::cli
