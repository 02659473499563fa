// kfp: kinetic flux profiling toolkit
//
// Subcommands: validate, compile, analyze, simulate, gen-data, fit, reproduce.
// Exit codes: 0 success, 1 domain violation, 2 I/O or format error.

#include "kfp/analysis.hpp"
#include "kfp/common.hpp"
#include "kfp/compile.hpp"
#include "kfp/dataset.hpp"
#include "kfp/fit.hpp"
#include "kfp/manifest.hpp"
#include "kfp/parameters.hpp"
#include "kfp/pathway.hpp"
#include "kfp/reproduce.hpp"
#include "kfp/simulate.hpp"
#include "kfp/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string out_dir;
    std::string format = "text";
    std::uint64_t seed = 0;
    std::vector<std::string> argv;
};

Eigen::VectorXd parse_list(const std::string& csv, const char* what) {
    std::vector<double> vals;
    std::string tok;
    std::stringstream ss(csv);
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(tok, &pos));
            if (pos != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw kfp::FormatError(std::string("bad ") + what + " entry \"" + tok + "\"");
        }
    }
    if (vals.empty())
        throw kfp::FormatError(std::string(what) + " list is empty");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw kfp::FormatError("cannot write \"" + path + "\"");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw kfp::FormatError("cannot create directory \"" + dir + "\"");
}

void matrix_block(std::ostream& out, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& rows,
                  const std::vector<std::string>& cols) {
    out << "";
    for (const std::string& c : cols)
        out << ',' << c;
    out << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        out << rows[i];
        for (int j = 0; j < m.cols(); ++j)
            out << ',' << kfp::fmt_g17(m(i, j));
        out << '\n';
    }
}

void vector_block(std::ostream& out, const Eigen::VectorXd& v,
                  const std::vector<std::string>& rows) {
    out << "node,value\n";
    for (int i = 0; i < v.size(); ++i)
        out << rows[i] << ',' << kfp::fmt_g17(v[i]) << '\n';
}

json params_to_json(const kfp::ParameterSpec& spec) {
    json doc;
    doc["free"] = json::array();
    for (const kfp::FreeParameter& p : spec.free) {
        json jp;
        jp["name"] = p.name;
        jp["kind"] = p.kind == kfp::ParamKind::Turnover ? "turnover"
                     : p.kind == kfp::ParamKind::Alpha  ? "alpha"
                                                        : "beta";
        jp["bounds"] = {p.lo, std::isfinite(p.hi) ? json(p.hi) : json(nullptr)};
        doc["free"].push_back(std::move(jp));
    }
    doc["derived"] = json::array();
    for (const kfp::DerivedParameter& p : spec.derived)
        doc["derived"].push_back({{"name", p.name}, {"expression", p.expression}});
    doc["concentration_dependent"] = json::array();
    for (const kfp::ConcentrationConstraint& c : spec.concentration_dependent)
        doc["concentration_dependent"].push_back(
            {{"node", c.node}, {"constraint", c.expression}});
    return doc;
}

json fit_summary_json(const kfp::PosteriorResult& res) {
    json doc;
    doc["parameters"] = json::array();
    for (const kfp::ParamSummary& s : res.summaries) {
        json jp;
        jp["name"] = s.name;
        jp["mode"] = s.mode;
        jp["credible_95"] = {s.ci.lo, s.ci.hi};
        jp["rhat"] = std::isfinite(s.rhat) ? json(s.rhat) : json("inf");
        jp["ess"] = s.ess;
        doc["parameters"].push_back(std::move(jp));
    }
    doc["converged"] = res.converged;
    doc["divergences"] = res.divergences;
    doc["mean_accept"] = res.mean_accept;
    doc["step_sizes"] = res.step_sizes;
    return doc;
}

void write_samples_csv(const std::string& path, const kfp::PosteriorResult& res) {
    std::ofstream out = open_out(path);
    out << "chain,draw";
    for (const std::string& n : res.names)
        out << ',' << n;
    out << '\n';
    for (std::size_t c = 0; c < res.chains.size(); ++c)
        for (int i = 0; i < res.chains[c].rows(); ++i) {
            out << (c + 1) << ',' << (i + 1);
            for (int p = 0; p < res.chains[c].cols(); ++p)
                out << ',' << kfp::fmt_g17(res.chains[c](i, p));
            out << '\n';
        }
}

void print_fit_text(std::ostream& out, const kfp::PosteriorResult& res) {
    out << "parameter            mode      2.5%     97.5%      rhat       ess\n";
    char line[160];
    for (const kfp::ParamSummary& s : res.summaries) {
        std::snprintf(line, sizeof(line), "%-16s %9.4f %9.4f %9.4f %9.3f %9.1f\n",
                      s.name.c_str(), s.mode, s.ci.lo, s.ci.hi, s.rhat, s.ess);
        out << line;
    }
    out << (res.converged ? "converged (all split R-hat < 1.05)"
                          : "NOT CONVERGED (split R-hat >= 1.05 somewhere)")
        << ", divergences " << res.divergences << "\n";
}

kfp::ScaledModel model_from_options(const kfp::PathwayGraph& g,
                                    const std::string& x_total_csv,
                                    const std::string& k_csv,
                                    std::optional<Eigen::VectorXd>* x_total_out = nullptr) {
    std::optional<Eigen::VectorXd> xt;
    if (!x_total_csv.empty()) {
        Eigen::VectorXd v = parse_list(x_total_csv, "--x-total");
        if (v.size() != g.size())
            throw kfp::DomainError("--x-total needs one value per metabolite");
        xt = v;
    }
    kfp::ScaledModel m = kfp::compile_scaled(g, xt);
    if (!k_csv.empty()) {
        if (xt)
            throw kfp::DomainError("give either --x-total or --k, not both");
        Eigen::VectorXd kv = parse_list(k_csv, "--k");
        if (kv.size() != g.size())
            throw kfp::DomainError("--k needs one value per metabolite");
        if ((kv.array() <= 0.0).any())
            throw kfp::DomainError("turnover rates must be positive");
        m.k = kv;
    }
    if (x_total_out)
        *x_total_out = xt;
    return m;
}

double default_horizon(const kfp::ScaledModel& m) {
    return 10.0 / m.k.minCoeff();
}

// ---------------------------------------------------------------- validate

int cmd_validate(const GlobalOpts& g, const std::string& path) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    const kfp::ValidationReport rep = kfp::validate_graph(graph);
    const kfp::EdgeCensus census = kfp::edge_census(graph);

    json doc;
    doc["valid"] = rep.valid();
    doc["census"] = {{"nodes", census.nodes},       {"edges", census.edges},
                     {"labeled_in", census.labeled_in}, {"unlabeled_in", census.unlabeled_in},
                     {"exits", census.exits},       {"internal", census.internal}};
    doc["violations"] = json::array();
    for (const kfp::Violation& v : rep.violations)
        doc["violations"].push_back({{"code", v.code}, {"message", v.message}});
    doc["arborescence"] = kfp::is_arborescence(graph);

    if (g.format == "json") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << (rep.valid() ? "valid" : "INVALID") << " pathway: "
                  << census.nodes << " metabolites, " << census.edges << " edges ("
                  << census.labeled_in << " labeled, " << census.unlabeled_in
                  << " unlabeled, " << census.exits << " exits, " << census.internal
                  << " internal)\n";
        for (const kfp::Violation& v : rep.violations)
            std::cout << "  [" << v.code << "] " << v.message << "\n";
    }
    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        open_out(g.out_dir + "/validation.json") << doc.dump(2) << "\n";
        kfp::write_manifest(g.out_dir, {"validate", g.argv, g.seed,
                                        {{path, kfp::sha256_file(path)}}, json()});
    }
    return rep.valid() ? 0 : 1;
}

// ----------------------------------------------------------------- compile

int cmd_compile(const GlobalOpts& g, const std::string& path,
                const std::string& x_total_csv) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    kfp::require_valid(graph);

    std::optional<Eigen::VectorXd> xt;
    if (!x_total_csv.empty()) {
        Eigen::VectorXd v = parse_list(x_total_csv, "--x-total");
        if (v.size() != graph.size())
            throw kfp::DomainError("--x-total needs one value per metabolite");
        xt = v;
    }
    const kfp::ScaledModel scaled = kfp::compile_scaled(graph, xt);
    const kfp::ParameterSpec spec = kfp::free_parameters(graph, xt.has_value());

    std::optional<kfp::CompiledModel> raw;
    if (xt)
        raw = kfp::compile_raw(graph, *xt);
    else {
        // raw flux matrices are still well defined without concentrations
        raw = kfp::CompiledModel{};
    }

    const auto& names = graph.nodes;
    std::vector<std::string> edge_ids;
    for (const kfp::Edge& e : graph.edges)
        edge_ids.push_back(e.id);

    // matrices that need only fluxes
    kfp::CompiledModel flux_only;
    {
        // reuse compile_raw internals by passing ones when x_total is absent
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(graph.size());
        flux_only = kfp::compile_raw(graph, xt ? *xt : ones);
    }

    struct Block {
        const char* name;
        Eigen::MatrixXd matrix;
        const std::vector<std::string>* cols;
    };
    std::vector<Block> blocks;
    blocks.push_back({"W", flux_only.W, &names});
    blocks.push_back({"D_in", Eigen::MatrixXd(flux_only.d_in.asDiagonal()), &names});
    blocks.push_back({"D_out", Eigen::MatrixXd(flux_only.d_out.asDiagonal()), &names});
    blocks.push_back({"D_L", Eigen::MatrixXd(flux_only.d_l.asDiagonal()), &names});
    blocks.push_back({"D_U", Eigen::MatrixXd(flux_only.d_u.asDiagonal()), &names});
    blocks.push_back({"D_V", Eigen::MatrixXd(flux_only.d_v.asDiagonal()), &names});
    blocks.push_back({"M", flux_only.incidence, &edge_ids});
    blocks.push_back({"B", scaled.B, &names});
    if (xt)
        blocks.push_back({"A_hat", flux_only.a_hat, &names});

    json jdoc;
    if (g.format == "json") {
        for (const Block& b : blocks) {
            json rowsj = json::array();
            for (int i = 0; i < b.matrix.rows(); ++i) {
                json row = json::array();
                for (int j = 0; j < b.matrix.cols(); ++j)
                    row.push_back(b.matrix(i, j));
                rowsj.push_back(std::move(row));
            }
            jdoc["matrices"][b.name] = std::move(rowsj);
        }
        auto vec = [](const Eigen::VectorXd& v) {
            return std::vector<double>(v.data(), v.data() + v.size());
        };
        jdoc["vectors"]["F_in"] = vec(flux_only.f_in);
        jdoc["vectors"]["F_out"] = vec(flux_only.f_out);
        jdoc["vectors"]["b_hat"] = vec(flux_only.b_hat);
        jdoc["vectors"]["alpha"] = vec(scaled.alpha);
        if (scaled.has_k())
            jdoc["vectors"]["K"] = vec(scaled.k);
        jdoc["parameters"] = params_to_json(spec);
        std::cout << jdoc.dump(2) << "\n";
    } else {
        for (const Block& b : blocks) {
            std::cout << "# " << b.name << "\n";
            matrix_block(std::cout, b.matrix, b.name == std::string("M") ? names : names,
                         *b.cols);
            std::cout << "\n";
        }
        std::cout << "# F_in\n";
        vector_block(std::cout, flux_only.f_in, names);
        std::cout << "\n# F_out\n";
        vector_block(std::cout, flux_only.f_out, names);
        std::cout << "\n# b_hat\n";
        vector_block(std::cout, flux_only.b_hat, names);
        std::cout << "\n# alpha\n";
        vector_block(std::cout, scaled.alpha, names);
        if (scaled.has_k()) {
            std::cout << "\n# K\n";
            vector_block(std::cout, scaled.k, names);
        }
        std::cout << "\n# parameters\n" << params_to_json(spec).dump(2) << "\n";
    }

    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        for (const Block& b : blocks) {
            std::ofstream f = open_out(g.out_dir + "/" + b.name + ".csv");
            matrix_block(f, b.matrix, names.size() == static_cast<std::size_t>(b.matrix.rows())
                                          ? names
                                          : names,
                         *b.cols);
        }
        {
            std::ofstream f = open_out(g.out_dir + "/F_in.csv");
            vector_block(f, flux_only.f_in, names);
        }
        {
            std::ofstream f = open_out(g.out_dir + "/F_out.csv");
            vector_block(f, flux_only.f_out, names);
        }
        {
            std::ofstream f = open_out(g.out_dir + "/b_hat.csv");
            vector_block(f, flux_only.b_hat, names);
        }
        {
            std::ofstream f = open_out(g.out_dir + "/alpha.csv");
            vector_block(f, scaled.alpha, names);
        }
        if (scaled.has_k()) {
            std::ofstream f = open_out(g.out_dir + "/K.csv");
            vector_block(f, scaled.k, names);
        }
        open_out(g.out_dir + "/parameters.json") << params_to_json(spec).dump(2) << "\n";
        json cfg;
        cfg["x_total"] = x_total_csv;
        kfp::write_manifest(g.out_dir, {"compile", g.argv, g.seed,
                                        {{path, kfp::sha256_file(path)}}, cfg});
    }
    return 0;
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const GlobalOpts& g, const std::string& path,
                const std::string& x_total_csv, const std::string& k_csv,
                double threshold) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    kfp::require_valid(graph);
    const kfp::ScaledModel m = model_from_options(graph, x_total_csv, k_csv);

    const kfp::IdentifiabilityReport rep = kfp::analyze_identifiability(m, graph);

    json doc;
    doc["ss_condition"] = rep.counting.ok;
    doc["counting"] = {{"lhs", rep.counting.lhs}, {"rhs", rep.counting.rhs}};
    doc["wcdd"] = {{"ok", rep.wcdd.ok}, {"strict_rows", rep.wcdd.strict_rows}};
    if (!rep.wcdd.ok)
        doc["wcdd"]["reason"] = rep.wcdd.reason;
    doc["degeneracy"] = json::array();
    for (const kfp::DegeneracyFlag& f : rep.degeneracy.flags)
        doc["degeneracy"].push_back(
            {{"code", f.code}, {"nodes", f.nodes}, {"message", f.message}});
    doc["ss_jacobian_rank"] = rep.degeneracy.jacobian_rank;
    doc["free_proportional_parameters"] = rep.degeneracy.n_proportional;
    doc["verdict"] = rep.verdict;
    doc["parameters"] = params_to_json(kfp::free_parameters(graph, !x_total_csv.empty()));

    if (m.has_k()) {
        const kfp::FastSlowReport fs = kfp::classify_fast_slow(m, threshold);
        doc["fast_slow"] = {{"separated", fs.separated},
                            {"ratio", fs.ratio},
                            {"fast_node", m.names[fs.fast_node]},
                            {"residual_at_ones", fs.residual_at_ones},
                            {"ic_on_slow_manifold", fs.ic_on_slow_manifold},
                            {"identifiable_fast_rate", fs.identifiable_fast_rate},
                            {"threshold", fs.threshold}};
        if (fs.separated) {
            const kfp::SlowManifold sm = kfp::slow_manifold(m);
            doc["fast_slow"]["slow_manifold"] = {
                {"fast_node", m.names[sm.fast_node]},
                {"coeffs", std::vector<double>(sm.coeffs.data(),
                                               sm.coeffs.data() + sm.coeffs.size())},
                {"constant", sm.constant}};
        }
    } else {
        doc["fast_slow"] = nullptr;
    }

    if (g.format == "json") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "steady-state counting condition: "
                  << (rep.counting.ok ? "holds" : "FAILS") << " (" << rep.counting.lhs
                  << " <= " << rep.counting.rhs << ")\n";
        std::cout << "wcdd uniqueness certificate: " << (rep.wcdd.ok ? "holds" : "FAILS")
                  << "\n";
        for (const kfp::DegeneracyFlag& f : rep.degeneracy.flags)
            std::cout << "degeneracy [" << f.code << "]: " << f.message << "\n";
        std::cout << "steady-state Jacobian rank: " << rep.degeneracy.jacobian_rank
                  << " of " << rep.degeneracy.n_proportional
                  << " proportional parameters\n";
        std::cout << "verdict: " << rep.verdict << "\n";
        if (doc["fast_slow"].is_object()) {
            std::cout << "time-scale ratio " << doc["fast_slow"]["ratio"].get<double>()
                      << (doc["fast_slow"]["separated"].get<bool>() ? " (separated)"
                                                                    : " (not separated)")
                      << ", fast rate identifiable: "
                      << (doc["fast_slow"]["identifiable_fast_rate"].get<bool>() ? "yes"
                                                                                 : "no")
                      << "\n";
        }
    }
    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        open_out(g.out_dir + "/analysis.json") << doc.dump(2) << "\n";
        kfp::write_manifest(g.out_dir, {"analyze", g.argv, g.seed,
                                        {{path, kfp::sha256_file(path)}}, json()});
    }
    return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const GlobalOpts& g, const std::string& path,
                 const std::string& x_total_csv, const std::string& k_csv,
                 double t_max, int points, const std::string& times_csv,
                 const std::string& solver, double rel_tol, bool svg) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    const kfp::ScaledModel m = model_from_options(graph, x_total_csv, k_csv);
    if (!m.has_k())
        throw kfp::DomainError("simulation needs --x-total or --k");

    Eigen::VectorXd times;
    if (!times_csv.empty()) {
        times = parse_list(times_csv, "--times");
    } else {
        if (t_max <= 0.0)
            t_max = default_horizon(m);
        times.resize(points);
        for (int i = 0; i < points; ++i)
            times[i] = t_max * i / (points - 1);
    }

    kfp::Trajectory traj;
    if (solver == "exact") {
        traj = kfp::solve_exact(m, times);
    } else if (solver == "numeric") {
        kfp::OdeOptions opts;
        opts.rel_tol = rel_tol;
        traj = kfp::solve_numeric(m, times, opts);
    } else {
        throw kfp::FormatError("--solver must be exact or numeric");
    }

    std::ostringstream csv;
    csv << "time";
    for (const std::string& n : m.names)
        csv << ',' << n;
    csv << '\n';
    for (int i = 0; i < traj.times.size(); ++i) {
        csv << kfp::fmt_g17(traj.times[i]);
        for (int j = 0; j < traj.values.cols(); ++j)
            csv << ',' << kfp::fmt_g17(traj.values(i, j));
        csv << '\n';
    }

    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        open_out(g.out_dir + "/trajectory.csv") << csv.str();
        if (svg)
            kfp::write_trajectory_svg(g.out_dir + "/trajectory.svg", traj, m.names,
                                      "labeled fraction vs time");
        json cfg;
        cfg["solver"] = solver;
        cfg["t_max"] = times[times.size() - 1];
        kfp::write_manifest(g.out_dir, {"simulate", g.argv, g.seed,
                                        {{path, kfp::sha256_file(path)}}, cfg});
    } else {
        std::cout << csv.str();
    }
    return 0;
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const GlobalOpts& g, const std::string& path,
                 const std::string& x_total_csv, const std::string& k_csv, int points,
                 double t_max, double noise, int replicates) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    const kfp::ScaledModel m = model_from_options(graph, x_total_csv, k_csv);
    if (!m.has_k())
        throw kfp::DomainError("dataset generation needs --x-total or --k");
    if (t_max <= 0.0)
        t_max = default_horizon(m);

    kfp::NoiseSpec spec;
    spec.relative_sd = noise;
    spec.replicates = replicates;
    spec.seed = g.seed;
    const kfp::Dataset d = kfp::gen_dataset(m, points, t_max, spec);

    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        kfp::write_dataset_csv(g.out_dir + "/data.csv", d);
        json cfg;
        cfg["points"] = points;
        cfg["t_max"] = t_max;
        cfg["noise"] = noise;
        cfg["replicates"] = replicates;
        kfp::write_manifest(g.out_dir, {"gen-data", g.argv, g.seed,
                                        {{path, kfp::sha256_file(path)}}, cfg});
    } else {
        kfp::write_dataset_csv(std::cout, d);
    }
    return 0;
}

// --------------------------------------------------------------------- fit

kfp::SigmaMode parse_sigma_mode(const std::string& s) {
    if (s == "infer")
        return kfp::SigmaMode::infer();
    if (s.rfind("fixed:", 0) == 0) {
        const std::string v = s.substr(6);
        try {
            std::size_t pos = 0;
            const double c = std::stod(v, &pos);
            if (pos == v.size())
                return kfp::SigmaMode::fixed(c);
        } catch (const std::exception&) {
        }
    }
    throw kfp::FormatError("--sigma-mode must be infer or fixed:<value>");
}

int cmd_fit(const GlobalOpts& g, const std::string& path, const std::string& data_path,
            const std::string& x_total_csv, int chains, int warmup, int draws,
            const std::string& sigma_mode, const std::string& sampler, int max_depth,
            bool plots) {
    const kfp::PathwayGraph graph = kfp::load_pathway(path);
    kfp::require_valid(graph);
    kfp::LoadReport lrep;
    const kfp::Dataset data = kfp::read_dataset_csv(data_path, &lrep);
    if (lrep.negative_values > 0)
        std::cerr << "note: " << lrep.negative_values
                  << " negative measurement(s), smallest " << lrep.min_value << "\n";

    std::optional<Eigen::VectorXd> xt;
    if (!x_total_csv.empty()) {
        Eigen::VectorXd v = parse_list(x_total_csv, "--x-total");
        if (v.size() != graph.size())
            throw kfp::DomainError("--x-total needs one value per metabolite");
        xt = v;
    }

    kfp::FitConfig cfg;
    cfg.sampler.chains = chains;
    cfg.sampler.warmup = warmup;
    cfg.sampler.draws = draws;
    cfg.sampler.seed = g.seed;
    cfg.sampler.max_tree_depth = max_depth;
    cfg.sampler.kind = sampler == "rwm" ? kfp::SamplerConfig::RandomWalk
                                        : kfp::SamplerConfig::Nuts;
    if (sampler != "hmc" && sampler != "rwm")
        throw kfp::FormatError("--sampler must be hmc or rwm");
    cfg.sigma = parse_sigma_mode(sigma_mode);

    const kfp::PosteriorResult res = kfp::fit(graph, data, xt, nullptr, cfg);

    if (g.format == "json")
        std::cout << fit_summary_json(res).dump(2) << "\n";
    else
        print_fit_text(std::cout, res);

    if (!g.out_dir.empty()) {
        ensure_dir(g.out_dir);
        write_samples_csv(g.out_dir + "/samples.csv", res);
        json summary = fit_summary_json(res);
        summary["config"] = {{"chains", chains},   {"warmup", warmup},
                             {"draws", draws},     {"seed", g.seed},
                             {"sampler", sampler}, {"sigma_mode", sigma_mode}};
        open_out(g.out_dir + "/summary.json") << summary.dump(2) << "\n";
        if (plots)
            kfp::write_fit_violins_svg(g.out_dir + "/violin.svg", res);
        kfp::write_manifest(g.out_dir,
                            {"fit", g.argv, g.seed,
                             {{path, kfp::sha256_file(path)},
                              {data_path, kfp::sha256_file(data_path)}},
                             summary["config"]});
    }
    return 0;
}

// --------------------------------------------------------------- reproduce

int cmd_reproduce(const GlobalOpts& g, const std::string& fig, int chains, int warmup,
                  int draws) {
    if (g.out_dir.empty())
        throw kfp::FormatError("reproduce needs --out <dir>");
    kfp::FitConfig cfg;
    cfg.sampler.chains = chains;
    cfg.sampler.warmup = warmup;
    cfg.sampler.draws = draws;

    const kfp::FigureRun run = kfp::reproduce_figure(fig, cfg, g.seed);
    ensure_dir(g.out_dir);

    std::ofstream table = open_out(g.out_dir + "/summary.csv");
    table << "figure,points,noise,parameter,truth,mode,ci_lo,ci_hi,rhat,ess\n";
    for (const kfp::CellResult& cell : run.cells) {
        char cell_name[64];
        std::snprintf(cell_name, sizeof(cell_name), "p%d_n%g", cell.cell.points,
                      cell.cell.noise * 100);
        const std::string dir = g.out_dir + "/" + cell_name;
        ensure_dir(dir);
        kfp::write_dataset_csv(dir + "/data.csv", cell.data);
        write_samples_csv(dir + "/samples.csv", cell.posterior);
        open_out(dir + "/summary.json") << fit_summary_json(cell.posterior).dump(2)
                                        << "\n";
        for (std::size_t p = 0; p < run.param_names.size(); ++p) {
            const kfp::ParamSummary& s = cell.posterior.summaries[p];
            table << fig << ',' << cell.cell.points << ',' << cell.cell.noise << ','
                  << s.name << ',' << kfp::fmt_g17(run.theta_true[p]) << ','
                  << kfp::fmt_g17(s.mode) << ',' << kfp::fmt_g17(s.ci.lo) << ','
                  << kfp::fmt_g17(s.ci.hi) << ',' << s.rhat << ',' << s.ess << '\n';
        }
        std::cout << fig << " " << cell_name << ": "
                  << (cell.posterior.converged ? "converged" : "NOT converged") << "\n";
    }
    kfp::write_violin_grid_svg(g.out_dir + "/" + fig + ".svg", run);
    json cfg_json;
    cfg_json["figure"] = fig;
    cfg_json["chains"] = chains;
    cfg_json["warmup"] = warmup;
    cfg_json["draws"] = draws;
    cfg_json["t_max"] = run.fixture.t_max;
    kfp::write_manifest(g.out_dir, {"reproduce", g.argv, g.seed, {}, cfg_json});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinetic flux profiling toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // let --out/--format/--seed appear after the subcommand

    GlobalOpts g;
    for (int i = 0; i < argc; ++i)
        g.argv.push_back(argv[i]);
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--format", g.format, "stdout format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--seed", g.seed, "random seed");

    std::string path, data_path, x_total_csv, k_csv, times_csv;
    std::string sigma_mode = "infer", sampler = "hmc", solver = "exact", fig;
    double t_max = 0.0, noise = 0.025, threshold = kfp::kFastSlowRatioThreshold;
    double rel_tol = 1e-8;
    int points = 0, replicates = 3, chains = 4, warmup = 1000, draws = 1000;
    int max_depth = 10;
    bool svg = false, plots = false;

    CLI::App* validate = app.add_subcommand("validate", "check a pathway file");
    validate->add_option("pathway", path)->required();

    CLI::App* compile = app.add_subcommand("compile", "emit model matrices");
    compile->add_option("pathway", path)->required();
    compile->add_option("--x-total", x_total_csv, "total concentrations, comma list");

    CLI::App* analyze = app.add_subcommand("analyze", "identifiability and time scales");
    analyze->add_option("pathway", path)->required();
    analyze->add_option("--x-total", x_total_csv);
    analyze->add_option("--k", k_csv, "turnover rates, comma list");
    analyze->add_option("--fast-slow-threshold", threshold);

    CLI::App* simulate = app.add_subcommand("simulate", "labeling trajectory");
    simulate->add_option("pathway", path)->required();
    simulate->add_option("--x-total", x_total_csv);
    simulate->add_option("--k", k_csv);
    simulate->add_option("--t-max", t_max);
    simulate->add_option("--points", points)->default_val(200);
    simulate->add_option("--times", times_csv, "explicit times, comma list");
    simulate->add_option("--solver", solver)->check(CLI::IsMember({"exact", "numeric"}));
    simulate->add_option("--rel-tol", rel_tol);
    simulate->add_flag("--svg", svg, "also write an SVG plot (needs --out)");

    CLI::App* gen = app.add_subcommand("gen-data", "synthetic noisy measurements");
    gen->add_option("pathway", path)->required();
    gen->add_option("--x-total", x_total_csv);
    gen->add_option("--k", k_csv);
    gen->add_option("--points", points)->required();
    gen->add_option("--t-max", t_max);
    gen->add_option("--noise", noise, "relative noise sd");
    gen->add_option("--replicates", replicates);

    CLI::App* fitc = app.add_subcommand("fit", "Bayesian parameter inference");
    fitc->add_option("pathway", path)->required();
    fitc->add_option("--data", data_path)->required();
    fitc->add_option("--x-total", x_total_csv);
    fitc->add_option("--chains", chains);
    fitc->add_option("--warmup", warmup);
    fitc->add_option("--draws", draws);
    fitc->add_option("--sigma-mode", sigma_mode, "infer or fixed:<value>");
    fitc->add_option("--sampler", sampler)->check(CLI::IsMember({"hmc", "rwm"}));
    fitc->add_option("--max-depth", max_depth);
    fitc->add_flag("--plots", plots, "write violin SVG (needs --out)");

    CLI::App* rep = app.add_subcommand("reproduce", "built-in study grids");
    rep->add_option("figure", fig, "fig4 | fig6 | fig8 | fig10")->required();
    rep->add_option("--chains", chains);
    rep->add_option("--warmup", warmup);
    rep->add_option("--draws", draws);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems are format errors; --help lands here too with code 0
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed())
            return cmd_validate(g, path);
        if (compile->parsed())
            return cmd_compile(g, path, x_total_csv);
        if (analyze->parsed())
            return cmd_analyze(g, path, x_total_csv, k_csv, threshold);
        if (simulate->parsed())
            return cmd_simulate(g, path, x_total_csv, k_csv, t_max, points, times_csv,
                                solver, rel_tol, svg);
        if (gen->parsed())
            return cmd_gen_data(g, path, x_total_csv, k_csv, points, t_max, noise,
                                replicates);
        if (fitc->parsed())
            return cmd_fit(g, path, data_path, x_total_csv, chains, warmup, draws,
                           sigma_mode, sampler, max_depth, plots);
        if (rep->parsed())
            return cmd_reproduce(g, fig, chains, warmup, draws);
    } catch (const kfp::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kfp::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
