#include "kfp/svg.hpp"

#include "kfp/common.hpp"
#include "kfp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kfp {

namespace {

const char* kPalette[] = {"#3366cc", "#dc3912", "#109618", "#ff9900",
                          "#990099", "#0099c6", "#dd4477", "#66aa00"};

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

struct Canvas {
    std::ostringstream body;
    double w, h;

    Canvas(double width, double height) : w(width), h(height) {}

    void line(double x1, double y1, double x2, double y2, const char* stroke,
              double sw = 1.0, const char* dash = nullptr) {
        body << "<line x1='" << num(x1) << "' y1='" << num(y1) << "' x2='" << num(x2)
             << "' y2='" << num(y2) << "' stroke='" << stroke << "' stroke-width='"
             << sw << "'";
        if (dash)
            body << " stroke-dasharray='" << dash << "'";
        body << "/>\n";
    }
    void rect(double x, double y, double rw, double rh, const char* fill,
              const char* stroke = "none") {
        body << "<rect x='" << num(x) << "' y='" << num(y) << "' width='" << num(rw)
             << "' height='" << num(rh) << "' fill='" << fill << "' stroke='"
             << stroke << "'/>\n";
    }
    void circle(double x, double y, double r, const char* fill) {
        body << "<circle cx='" << num(x) << "' cy='" << num(y) << "' r='" << num(r)
             << "' fill='" << fill << "'/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12,
              const char* anchor = "start", const char* fill = "#222") {
        body << "<text x='" << num(x) << "' y='" << num(y) << "' font-size='" << size
             << "' font-family='sans-serif' text-anchor='" << anchor << "' fill='"
             << fill << "'>" << s << "</text>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const char* stroke, double sw = 1.5) {
        body << "<polyline fill='none' stroke='" << stroke << "' stroke-width='" << sw
             << "' points='";
        for (const auto& [x, y] : pts)
            body << num(x) << ',' << num(y) << ' ';
        body << "'/>\n";
    }
    void polygon(const std::vector<std::pair<double, double>>& pts, const char* fill) {
        body << "<polygon fill='" << fill << "' fill-opacity='0.55' stroke='none' points='";
        for (const auto& [x, y] : pts)
            body << num(x) << ',' << num(y) << ' ';
        body << "'/>\n";
    }

    void save(const std::string& path) {
        std::ofstream out(path);
        if (!out)
            throw FormatError("cannot write \"" + path + "\"");
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(w)
            << "' height='" << num(h) << "' viewBox='0 0 " << num(w) << ' ' << num(h)
            << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
            << body.str() << "</svg>\n";
    }
};

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// violin silhouette + quartile box + mode dot at horizontal slot [cx-hw, cx+hw]
void draw_violin(Canvas& cv, const std::vector<double>& samples, double cx, double hw,
                 double y0, double y1, double v_lo, double v_hi, const char* color) {
    auto ty = [&](double v) {
        return y1 + (y0 - y1) * (v - v_lo) / (v_hi - v_lo);
    };
    const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx > mn) {
        const int k = 41;
        Eigen::VectorXd grid(k);
        for (int i = 0; i < k; ++i)
            grid[i] = mn + (mx - mn) * i / (k - 1);
        const Eigen::VectorXd dens = kde_density(samples, grid);
        const double peak = dens.maxCoeff();
        if (peak > 0.0) {
            std::vector<std::pair<double, double>> outline;
            for (int i = 0; i < k; ++i)
                outline.emplace_back(cx - hw * dens[i] / peak, ty(grid[i]));
            for (int i = k - 1; i >= 0; --i)
                outline.emplace_back(cx + hw * dens[i] / peak, ty(grid[i]));
            cv.polygon(outline, color);
        }
    }
    std::vector<double> s = samples;
    const double q1 = quantile(s, 0.25), q3 = quantile(s, 0.75);
    const double med = quantile(s, 0.5);
    const double w1 = quantile(s, 0.025), w3 = quantile(s, 0.975);
    cv.line(cx, ty(w1), cx, ty(w3), "#333", 1.0);
    cv.rect(cx - hw * 0.18, ty(q3), hw * 0.36, ty(q1) - ty(q3), "white", "#333");
    cv.line(cx - hw * 0.18, ty(med), cx + hw * 0.18, ty(med), "#333", 1.5);
    cv.circle(cx, ty(kde_mode(samples)), 2.5, "#111");
}

} // namespace

void write_trajectory_svg(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& names,
                          const std::string& title) {
    const double W = 820, H = 480, ml = 60, mr = 170, mt = 40, mb = 50;
    Canvas cv(W, H);
    const double x0 = ml, x1 = W - mr, y0 = H - mb, y1 = mt;

    const double t_lo = 0.0;
    const double t_hi = traj.times.size() ? traj.times[traj.times.size() - 1] : 1.0;
    double v_lo = 0.0, v_hi = 1.05;
    if (traj.values.size()) {
        v_lo = std::min(0.0, traj.values.minCoeff());
        v_hi = std::max(1.05, traj.values.maxCoeff() * 1.05);
    }
    auto tx = [&](double t) { return x0 + (x1 - x0) * (t - t_lo) / (t_hi - t_lo); };
    auto ty = [&](double v) { return y0 + (y1 - y0) * (v - v_lo) / (v_hi - v_lo); };

    cv.line(x0, y0, x1, y0, "#444");
    cv.line(x0, y0, x0, y1, "#444");
    for (int i = 0; i <= 5; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / 5;
        cv.line(tx(t), y0, tx(t), y0 + 4, "#444");
        cv.text(tx(t), y0 + 18, short_num(t), 11, "middle");
        const double v = v_lo + (v_hi - v_lo) * i / 5;
        cv.line(x0 - 4, ty(v), x0, ty(v), "#444");
        cv.text(x0 - 8, ty(v) + 4, short_num(v), 11, "end");
    }
    cv.text((x0 + x1) / 2, H - 12, "time", 12, "middle");
    cv.text((x0 + x1) / 2, 22, title, 14, "middle");

    for (int j = 0; j < traj.values.cols(); ++j) {
        const char* color = kPalette[j % 8];
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < traj.times.size(); ++i)
            pts.emplace_back(tx(traj.times[i]), ty(traj.values(i, j)));
        cv.polyline(pts, color);
        cv.line(x1 + 12, mt + 18.0 * j + 6, x1 + 32, mt + 18.0 * j + 6, color, 2.0);
        cv.text(x1 + 38, mt + 18.0 * j + 10,
                j < static_cast<int>(names.size()) ? names[j] : "series", 12);
    }
    cv.save(path);
}

void write_violin_grid_svg(const std::string& path, const FigureRun& run) {
    const int n_params = static_cast<int>(run.param_names.size());
    const double panel_w = 220, panel_h = 170, ml = 80, mt = 60, gap = 18;
    const double W = ml + 3 * (panel_w + gap) + 30;
    const double H = mt + n_params * (panel_h + gap) + 40;
    Canvas cv(W, H);
    cv.text(W / 2, 26, run.fixture.id + ": " + run.fixture.title, 15, "middle");

    for (int p = 0; p < n_params; ++p) {
        // shared vertical range per parameter row
        double v_lo = run.theta_true[p], v_hi = run.theta_true[p];
        for (const CellResult& cell : run.cells) {
            const std::vector<double> s = cell.posterior.pooled(p);
            v_lo = std::min(v_lo, *std::min_element(s.begin(), s.end()));
            v_hi = std::max(v_hi, *std::max_element(s.begin(), s.end()));
        }
        const double pad = 0.06 * (v_hi - v_lo + 1e-12);
        v_lo -= pad;
        v_hi += pad;

        for (int ni = 0; ni < 3; ++ni) {
            const double px = ml + ni * (panel_w + gap);
            const double py = mt + p * (panel_h + gap);
            const double y0 = py + panel_h, y1 = py;
            cv.rect(px, py, panel_w, panel_h, "none", "#999");
            auto ty = [&](double v) {
                return y1 + (y0 - y1) * (v_hi - v) / (v_hi - v_lo);
            };
            cv.line(px, ty(run.theta_true[p]), px + panel_w, ty(run.theta_true[p]),
                    "#c22", 1.0, "5,4");
            for (int pi = 0; pi < 3; ++pi) {
                // cells are stored points-major
                const CellResult& cell = run.cells[pi * 3 + ni];
                const double cx = px + panel_w * (pi + 0.5) / 3;
                draw_violin(cv, cell.posterior.pooled(p), cx, panel_w / 8, y0, y1,
                            v_lo, v_hi, kPalette[pi]);
                if (p == n_params - 1)
                    cv.text(cx, mt + n_params * (panel_h + gap) + 14,
                            std::to_string(kGridPoints[pi]) + " pts", 11, "middle");
            }
            cv.text(px + 4, py + 14, short_num(v_hi), 10);
            cv.text(px + 4, py + panel_h - 4, short_num(v_lo), 10);
            if (p == 0)
                cv.text(px + panel_w / 2, mt - 10,
                        "noise " + short_num(kGridNoise[ni] * 100) + "%", 12, "middle");
        }
        cv.text(16, mt + p * (panel_h + gap) + panel_h / 2, run.param_names[p], 12);
    }
    cv.save(path);
}

void write_fit_violins_svg(const std::string& path, const PosteriorResult& res) {
    const int n = static_cast<int>(res.names.size());
    const double slot_w = 110, ml = 60, mt = 40, mb = 60;
    const double W = ml + n * slot_w + 30, H = 420;
    Canvas cv(W, H);
    const double y0 = H - mb, y1 = mt;
    for (int p = 0; p < n; ++p) {
        const std::vector<double> s = res.pooled(p);
        double v_lo = *std::min_element(s.begin(), s.end());
        double v_hi = *std::max_element(s.begin(), s.end());
        const double pad = 0.06 * (v_hi - v_lo + 1e-12);
        v_lo -= pad;
        v_hi += pad;
        const double cx = ml + slot_w * (p + 0.5);
        draw_violin(cv, s, cx, slot_w * 0.38, y0, y1, v_lo, v_hi, kPalette[p % 8]);
        cv.text(cx, H - mb + 20, res.names[p], 12, "middle");
        cv.text(cx, H - mb + 36, "[" + short_num(v_lo) + ", " + short_num(v_hi) + "]",
                10, "middle");
    }
    cv.text(W / 2, 22, "posterior marginals", 14, "middle");
    cv.save(path);
}

} // namespace kfp
