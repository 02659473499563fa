#include "kfp/reproduce.hpp"

#include "kfp/common.hpp"
#include "kfp/parameters.hpp"
#include "kfp/simulate.hpp"

#include <cmath>

namespace kfp {

namespace {

Edge make_edge(std::string id, EdgeKind kind, int src, int tgt, double flux) {
    Edge e;
    e.id = std::move(id);
    e.kind = kind;
    e.source = src;
    e.target = tgt;
    e.flux = flux;
    return e;
}

// Two-pool graph with unit throughput at both nodes. alpha/beta are the
// scaled proportions; the reverse edge is dropped when beta12 = 0.
PathwayGraph two_pool(double alpha1, double alpha2, double beta12) {
    PathwayGraph g;
    g.nodes = {"X1", "X2"};
    const double w21 = beta12;            // X2 -> X1
    const double w12 = 1.0 - alpha2;      // X1 -> X2
    const double l1 = 1.0 - alpha1 - w21; // labeled entry
    if (!(l1 > 0.0))
        throw DomainError("fixture proportions leave no room for the labeled entry");
    g.edges.push_back(make_edge("f1", EdgeKind::LabeledIn, -1, 0, l1));
    g.edges.push_back(make_edge("f2", EdgeKind::UnlabeledIn, -1, 0, alpha1));
    g.edges.push_back(make_edge("f3", EdgeKind::Exit, 0, -1, 1.0 - w12));
    g.edges.push_back(make_edge("f4", EdgeKind::Internal, 0, 1, w12));
    g.edges.push_back(make_edge("f5", EdgeKind::UnlabeledIn, -1, 1, alpha2));
    if (beta12 > 0.0)
        g.edges.push_back(make_edge("f6", EdgeKind::Internal, 1, 0, w21));
    g.edges.push_back(make_edge("f7", EdgeKind::Exit, 1, -1, 1.0 - w21));
    return g;
}

FigureFixture build(std::string id, std::string title, double alpha1, double alpha2,
                    double beta12, double k1, double k2) {
    FigureFixture fx;
    fx.id = std::move(id);
    fx.title = std::move(title);
    fx.graph = two_pool(alpha1, alpha2, beta12);
    fx.x_total = Eigen::Vector2d(1.0 / k1, 1.0 / k2); // unit throughput
    fx.truth = compile_scaled(fx.graph, fx.x_total);
    fx.t_max = 3.0 / slowest_rate(fx.truth);
    return fx;
}

} // namespace

std::vector<std::string> figure_ids() { return {"fig4", "fig6", "fig8", "fig10"}; }

FigureFixture figure_fixture(const std::string& id) {
    if (id == "fig4")
        return build("fig4", "irreversible two-pool chain",
                     0.25, 0.40, 0.0, 7.0 / 20, 3.0 / 10);
    if (id == "fig6")
        return build("fig6", "reversible two-pool exchange",
                     0.30, 0.25, 0.15, 7.0 / 20, 3.0 / 10);
    if (id == "fig8")
        return build("fig8", "fast labeled pool, slow neighbor",
                     0.25, 0.30, 0.15, 1.0, 1.0 / 25);
    if (id == "fig10")
        return build("fig10", "slow labeled pool, fast neighbor",
                     0.25, 0.30, 0.15, 1.0 / 25, 1.0);
    throw DomainError("unknown figure id \"" + id + "\" (expected fig4, fig6, fig8 or fig10)");
}

CellResult reproduce_cell(const FigureFixture& fx, const CellSpec& cell,
                          const FitConfig& base, std::uint64_t seed) {
    NoiseSpec noise;
    noise.relative_sd = cell.noise;
    noise.replicates = cell.replicates;
    noise.seed = Rng::derive(seed, 0x0da7a);

    CellResult out;
    out.cell = cell;
    out.data = gen_dataset(fx.truth, cell.points, fx.t_max, noise);

    FitConfig cfg = base;
    cfg.sampler.seed = Rng::derive(seed, 0x5a3b1e);
    out.posterior = fit(fx.graph, out.data, fx.x_total, nullptr, cfg);
    return out;
}

FigureRun reproduce_figure(const std::string& id, const FitConfig& base,
                           std::uint64_t seed) {
    FigureRun run;
    run.fixture = figure_fixture(id);
    ModelTemplate tmpl(run.fixture.graph, run.fixture.x_total);
    run.param_names = tmpl.spec().names();
    run.theta_true = tmpl.theta_from(run.fixture.truth);

    int idx = 0;
    for (int pi = 0; pi < 3; ++pi)
        for (int ni = 0; ni < 3; ++ni) {
            CellSpec cell;
            cell.points = kGridPoints[pi];
            cell.noise = kGridNoise[ni];
            run.cells.push_back(
                reproduce_cell(run.fixture, cell, base, Rng::derive(seed, idx)));
            ++idx;
        }
    return run;
}

} // namespace kfp
