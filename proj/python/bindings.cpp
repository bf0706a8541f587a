#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fracwrmg/exact.hpp"
#include "fracwrmg/fracdisc.hpp"
#include "fracwrmg/hmatrix.hpp"
#include "fracwrmg/mesh.hpp"
#include "fracwrmg/multigrid.hpp"
#include "fracwrmg/problem.hpp"

namespace py = pybind11;
using namespace fracwrmg;

namespace {

TemporalMesh mesh_for(std::size_t steps, double delta, const std::string& kind, double final_time) {
    return parse_mesh_kind(kind) == MeshKind::Graded ? make_graded_mesh(final_time, steps, delta)
                                                     : make_uniform_mesh(final_time, steps);
}

std::vector<double> points_of(const TemporalMesh& mesh) { return {mesh.points().begin(), mesh.points().end()}; }

Eigen::MatrixXd dense_r(std::size_t steps, double delta, const std::string& kind) {
    const auto mesh = mesh_for(steps, delta, kind, 1.0);
    const auto r = assemble_dense_R(mesh, delta);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(steps));
    for (std::size_t m = 1; m <= steps; ++m)
        for (std::size_t j = 1; j <= m; ++j)
            out(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(j - 1)) = r(m, j);
    return out;
}

struct PyHMatrix {
    std::shared_ptr<const HMatrix> h;
};

PyHMatrix build(std::size_t steps, double delta, const std::string& kind, std::size_t rank, std::size_t leaf) {
    const auto mesh = mesh_for(steps, delta, kind, 1.0);
    return {std::make_shared<const HMatrix>(HMatrix::build(mesh, delta, {rank, leaf}))};
}

py::dict storage_dict(const StorageReport& s) {
    py::dict d;
    d["dense_scalars"] = s.dense_scalars;
    d["lowrank_scalars"] = s.lowrank_scalars;
    d["compressed_scalars"] = s.compressed_scalars();
    d["dense_equivalent_scalars"] = s.dense_equivalent_scalars;
    d["zero_leaves"] = s.zero_leaves;
    d["dense_leaves"] = s.dense_leaves;
    d["lowrank_leaves"] = s.lowrank_leaves;
    return d;
}

py::dict solve(const std::string& problem, double delta, std::size_t n, std::size_t m, const std::string& mesh,
               std::size_t rank, std::size_t leaf, const std::string& cycle, double tol, int max_iter,
               const std::string& init, std::uint64_t seed) {
    ProblemSpec spec;
    spec.kind = parse_problem_kind(problem);
    spec.delta = delta;
    spec.n = n;
    spec.steps = m;
    spec.mesh = parse_mesh_kind(mesh);
    CycleConfig c;
    if (cycle.empty())
        c.pre_smooth = spec.kind == ProblemKind::Heat2D ? 1 : 0;
    else
        cli::parse_cycle(cycle, c);
    c.tol = tol;
    c.max_iter = max_iter;
    if (init != "random" && init != "zero")
        throw std::invalid_argument("init must be random or zero");
    c.initial_guess = init == "zero" ? InitialGuess::Zero : InitialGuess::Random;
    c.seed = seed;
    c.validate();

    const Problem p = make_problem(spec);
    auto h = std::make_shared<const HMatrix>(HMatrix::build(p.mesh, delta, {rank, leaf}));
    std::pair<SpaceTimeField, SolveReport> result;
    {
        py::gil_scoped_release release;
        result = WaveformMultigrid(p.grid, h, c).solve(p.rhs);
    }
    const auto& [u, report] = result;
    py::dict d;
    d["iterations"] = report.iterations;
    d["converged"] = report.converged;
    d["convergence_factor"] = report.convergence_factor;
    d["residual_norms"] = report.residual_norms;
    d["seconds"] = report.seconds;
    d["max_error"] = max_error(u, sample_exact(p));
    d["cycle"] = cli::cycle_label(c);
    d["t"] = points_of(p.mesh);
    d["u"] = Eigen::MatrixXd(u.matrix().transpose());
    return d;
}

}  // namespace

PYBIND11_MODULE(_fracwrmg, m) {
    m.doc() = "Multigrid waveform relaxation with H-matrices for time-fractional heat equations";

    m.def(
        "graded_mesh", [](std::size_t steps, double delta, double final_time) {
            return points_of(make_graded_mesh(final_time, steps, delta));
        },
        py::arg("steps"), py::arg("delta"), py::arg("final_time") = 1.0);
    m.def(
        "uniform_mesh", [](std::size_t steps, double final_time) { return points_of(make_uniform_mesh(final_time, steps)); },
        py::arg("steps"), py::arg("final_time") = 1.0);
    m.def("dense_r", &dense_r, "Dense lower-triangular L1 matrix R (M x M)", py::arg("steps"), py::arg("delta"),
          py::arg("mesh") = "graded");
    m.def(
        "mittag_leffler", [](double delta, double z) { return mittag_leffler(delta, z).value; }, py::arg("delta"),
        py::arg("z"));

    py::class_<PyHMatrix>(m, "HMatrix")
        .def(py::init(&build), py::arg("steps"), py::arg("delta"), py::arg("mesh") = "graded", py::arg("rank") = 20,
             py::arg("leaf") = 32)
        .def_property_readonly("size", [](const PyHMatrix& self) { return self.h->size(); })
        .def_property_readonly("rank", [](const PyHMatrix& self) { return self.h->rank(); })
        .def("matvec",
             [](const PyHMatrix& self, const Eigen::MatrixXd& x) {
                 Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), x.cols());
                 self.h->multiply_add(x, y);
                 return y;
             })
        .def("shifted_solve",
             [](const PyHMatrix& self, double shift, const Eigen::MatrixXd& b) {
                 Eigen::MatrixXd x = b;
                 self.h->shifted_forward_solve_inplace(shift, x);
                 return x;
             })
        .def("densify", [](const PyHMatrix& self) { return self.h->densify(); })
        .def("storage", [](const PyHMatrix& self) { return storage_dict(self.h->storage()); });

    m.def("solve", &solve, "Solve a benchmark problem; u has shape (points, steps)", py::arg("problem") = "heat1d",
          py::arg("delta") = 0.5, py::arg("n") = 127, py::arg("m") = 128, py::arg("mesh") = "graded",
          py::arg("rank") = 20, py::arg("leaf") = 32, py::arg("cycle") = "", py::arg("tol") = 1e-10,
          py::arg("max_iter") = 100, py::arg("init") = "random", py::arg("seed") = 1);
}
