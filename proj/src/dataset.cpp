#include "kfp/dataset.hpp"

#include "kfp/common.hpp"
#include "kfp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kfp {

namespace {

Eigen::VectorXd even_times(int n_points, double t_max) {
    if (n_points < 1)
        throw DomainError("need at least one time point");
    if (!(t_max > 0.0))
        throw DomainError("t_max must be positive");
    Eigen::VectorXd t(n_points);
    for (int j = 0; j < n_points; ++j)
        t[j] = t_max * (j + 1) / n_points;
    return t;
}

} // namespace

Dataset gen_dataset_at(const ScaledModel& m, const Eigen::VectorXd& times,
                       const NoiseSpec& noise) {
    if (times.size() < 1)
        throw DomainError("need at least one time point");
    if (!(times[0] > 0.0))
        throw DomainError("measurement times must be strictly positive");
    if (noise.replicates < 1)
        throw DomainError("need at least one replicate");
    if (!(noise.relative_sd >= 0.0))
        throw DomainError("relative noise must be nonnegative");

    const Trajectory traj = solve_exact(m, times);
    Dataset d;
    d.times = times;
    d.nodes = m.names;
    d.replicates = noise.replicates;
    d.values.resize(static_cast<std::size_t>(d.n_times()) * d.n_nodes() * d.replicates);
    Rng rng(noise.seed);
    for (int t = 0; t < d.n_times(); ++t)
        for (int i = 0; i < d.n_nodes(); ++i)
            for (int r = 0; r < d.replicates; ++r) {
                const double mu = traj.values(t, i);
                d.at(t, i, r) = mu + noise.relative_sd * mu * rng.normal();
            }
    d.truth = m;
    d.noise = noise;
    return d;
}

Dataset gen_dataset(const ScaledModel& m, int n_points, double t_max,
                    const NoiseSpec& noise) {
    return gen_dataset_at(m, even_times(n_points, t_max), noise);
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
    out << "time,node,replicate,value\n";
    for (int t = 0; t < d.n_times(); ++t)
        for (int i = 0; i < d.n_nodes(); ++i)
            for (int r = 0; r < d.replicates; ++r)
                out << fmt_g17(d.times[t]) << ',' << d.nodes[i] << ',' << (r + 1)
                    << ',' << fmt_g17(d.at(t, i, r)) << '\n';
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out)
        throw FormatError("cannot write \"" + path + "\"");
    write_dataset_csv(out, d);
}

namespace {

double parse_number(const std::string& s, int line_no, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw FormatError("row " + std::to_string(line_no) + ": bad " + what +
                          " \"" + s + "\"");
    }
    if (pos != s.size())
        throw FormatError("row " + std::to_string(line_no) + ": bad " + what +
                          " \"" + s + "\"");
    return v;
}

} // namespace

Dataset read_dataset_csv(std::istream& in, LoadReport* report) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("empty dataset file");
    if (line.size() && line.back() == '\r')
        line.pop_back();
    if (line != "time,node,replicate,value")
        throw FormatError("dataset header must be time,node,replicate,value");

    struct Cell {
        double time;
        std::string node;
        int rep;
        double value;
    };
    std::vector<Cell> cells;
    std::vector<std::string> node_order;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            f.push_back(tok);
        if (f.size() != 4)
            throw FormatError("row " + std::to_string(line_no) +
                              ": expected 4 fields, got " + std::to_string(f.size()));
        Cell c;
        c.time = parse_number(f[0], line_no, "time");
        if (!(c.time > 0.0))
            throw FormatError("row " + std::to_string(line_no) +
                              ": time must be positive");
        c.node = f[1];
        if (c.node.empty())
            throw FormatError("row " + std::to_string(line_no) + ": empty node name");
        const double rep = parse_number(f[2], line_no, "replicate");
        if (rep < 1 || rep != std::floor(rep))
            throw FormatError("row " + std::to_string(line_no) +
                              ": replicate must be a positive integer");
        c.rep = static_cast<int>(rep);
        c.value = parse_number(f[3], line_no, "value");
        if (std::find(node_order.begin(), node_order.end(), c.node) == node_order.end())
            node_order.push_back(c.node);
        cells.push_back(std::move(c));
    }
    if (cells.empty())
        throw FormatError("dataset has no data rows");

    std::vector<double> times;
    int max_rep = 0;
    for (const Cell& c : cells) {
        if (std::find(times.begin(), times.end(), c.time) == times.end())
            times.push_back(c.time);
        max_rep = std::max(max_rep, c.rep);
    }
    std::sort(times.begin(), times.end());

    Dataset d;
    d.times = Eigen::Map<const Eigen::VectorXd>(times.data(), times.size());
    d.nodes = node_order;
    d.replicates = max_rep;
    const std::size_t total =
        static_cast<std::size_t>(times.size()) * node_order.size() * max_rep;
    d.values.assign(total, std::numeric_limits<double>::quiet_NaN());

    for (const Cell& c : cells) {
        const int t = static_cast<int>(
            std::find(times.begin(), times.end(), c.time) - times.begin());
        const int i = static_cast<int>(
            std::find(node_order.begin(), node_order.end(), c.node) -
            node_order.begin());
        double& slot = d.at(t, i, c.rep - 1);
        if (!std::isnan(slot))
            throw FormatError("duplicate cell time=" + fmt_g17(c.time) + " node=" +
                              c.node + " replicate=" + std::to_string(c.rep));
        slot = c.value;
    }
    int negatives = 0;
    double min_v = std::numeric_limits<double>::infinity();
    for (int t = 0; t < d.n_times(); ++t)
        for (int i = 0; i < d.n_nodes(); ++i)
            for (int r = 0; r < d.replicates; ++r) {
                const double v = d.at(t, i, r);
                if (std::isnan(v))
                    throw FormatError("missing cell time=" + fmt_g17(d.times[t]) +
                                      " node=" + d.nodes[i] + " replicate=" +
                                      std::to_string(r + 1));
                if (v < 0.0)
                    ++negatives;
                min_v = std::min(min_v, v);
            }
    if (report) {
        report->rows = static_cast<int>(cells.size());
        report->negative_values = negatives;
        report->min_value = min_v;
    }
    return d;
}

Dataset read_dataset_csv(const std::string& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open dataset file \"" + path + "\"");
    return read_dataset_csv(in, report);
}

} // namespace kfp
