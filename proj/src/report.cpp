#include "metaor/report.hpp"
#include "metaor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace metaor {

std::string to_string(Method m) {
    switch (m) {
        case Method::DSL: return "dsl";
        case Method::ML: return "ml";
        case Method::NaiveBayes: return "naive-bayes";
        case Method::UREE: return "ur-ee";
    }
    return "dsl";
}

Method method_from_string(const std::string& s) {
    if (s == "dsl") return Method::DSL;
    if (s == "ml") return Method::ML;
    if (s == "naive-bayes" || s == "naive") return Method::NaiveBayes;
    if (s == "ur-ee" || s == "uree") return Method::UREE;
    throw Error(ErrorKind::BadInput, "unknown method: " + s);
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

double sd_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / double(xs.size() - 1));
}

double quantile_of(std::vector<double> xs, double p) {
    if (xs.empty()) throw Error(ErrorKind::BadInput, "quantile of empty vector");
    std::sort(xs.begin(), xs.end());
    const double h = (double(xs.size()) - 1.0) * p;
    const std::size_t i = std::size_t(h);
    if (i + 1 >= xs.size()) return xs.back();
    return xs[i] + (h - double(i)) * (xs[i + 1] - xs[i]);
}

namespace {
double trapezoid_l1(const std::function<double(double)>& fa,
                    const std::function<double(double)>& fb, double lo, double hi,
                    int points) {
    const double step = (hi - lo) / double(points - 1);
    double sum = 0.0;
    double prev = std::fabs(fa(lo) - fb(lo));
    for (int i = 1; i < points; ++i) {
        const double x = lo + step * double(i);
        const double cur = std::fabs(fa(x) - fb(x));
        sum += 0.5 * (prev + cur) * step;
        prev = cur;
    }
    return 0.5 * sum;
}
} // namespace

double l1_distance(const std::function<double(double)>& fa,
                   const std::function<double(double)>& fb, double lo, double hi) {
    if (!(hi > lo)) throw Error(ErrorKind::BadInput, "l1_distance: empty interval");
    int points = 1025;
    double value = trapezoid_l1(fa, fb, lo, hi, points);
    for (int pass = 0; pass < 12; ++pass) {
        points = 2 * (points - 1) + 1;
        const double refined = trapezoid_l1(fa, fb, lo, hi, points);
        if (std::fabs(refined - value) <= 1e-4)
            return std::clamp(refined, 0.0, 1.0);
        value = refined;
    }
    throw Error(ErrorKind::GridTooCoarse, "l1_distance did not stabilize");
}

double l1_distance_grid(const std::vector<double>& grid, const std::vector<double>& fa,
                        const std::vector<double>& fb) {
    if (grid.size() != fa.size() || grid.size() != fb.size() || grid.size() < 2)
        throw Error(ErrorKind::BadInput, "l1_distance_grid: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = std::fabs(fa[i - 1] - fb[i - 1]);
        const double b = std::fabs(fa[i] - fb[i]);
        sum += 0.5 * (a + b) * (grid[i] - grid[i - 1]);
    }
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

double effective_sample_size(double var_naive, double var_uree, double n_total) {
    if (!(var_naive > 0.0 && var_uree > 0.0))
        throw Error(ErrorKind::BadInput, "effective_sample_size: variances must be > 0");
    return (var_naive / var_uree) * n_total;
}

double silverman_bandwidth(const std::vector<double>& draws) {
    if (draws.size() < 2)
        throw Error(ErrorKind::BadInput, "bandwidth needs at least two draws");
    const double sd = sd_of(draws);
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_of(sorted, 0.75) - quantile_of(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(sd, 1e-12);
    return 0.9 * spread * std::pow(double(draws.size()), -0.2);
}

Kde kde_density(const std::vector<double>& draws, int grid_points, double lo, double hi,
                double bandwidth) {
    Kde out;
    out.bandwidth = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(draws);
    out.grid.resize(grid_points);
    out.density.resize(grid_points);
    const double step = (hi - lo) / double(grid_points - 1);
    const double inv_h = 1.0 / out.bandwidth;
    const double norm = inv_h / double(draws.size());
    for (int g = 0; g < grid_points; ++g) {
        const double x = lo + step * double(g);
        double s = 0.0;
        for (double d : draws) s += norm_pdf((x - d) * inv_h);
        out.grid[g] = x;
        out.density[g] = s * norm;
    }
    return out;
}

double l1_between_draws(const std::vector<double>& a, const std::vector<double>& b,
                        double* bandwidth_out) {
    // Common bandwidth: average of the two plug-in values.
    const double h = 0.5 * (silverman_bandwidth(a) + silverman_bandwidth(b));
    const double lo = std::min(*std::min_element(a.begin(), a.end()),
                               *std::min_element(b.begin(), b.end())) -
                      4.0 * h;
    const double hi = std::max(*std::max_element(a.begin(), a.end()),
                               *std::max_element(b.begin(), b.end())) +
                      4.0 * h;
    const int points = 1024;
    const Kde ka = kde_density(a, points, lo, hi, h);
    const Kde kb = kde_density(b, points, lo, hi, h);
    if (bandwidth_out) *bandwidth_out = h;
    return l1_distance_grid(ka.grid, ka.density, kb.density);
}

// ---------------------------------------------------------------------------
// Forest plot
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct Row {
    std::string label;
    double log_or, lo, hi;
    bool summary;
};

} // namespace

PlotDocument forest_plot(const std::vector<MetaResult>& results,
                         const std::vector<StudyOrEffect>& study_effects) {
    if (results.empty() && study_effects.empty())
        throw Error(ErrorKind::BadInput, "forest_plot: nothing to draw");

    std::vector<Row> rows;
    for (const auto& e : study_effects)
        rows.push_back({e.id, e.log_or, e.lo, e.hi, false});
    for (const auto& r : results)
        rows.push_back({to_string(r.method), r.d_mean, r.d_lo, r.d_hi, true});

    double lo = 0.0, hi = 0.0; // log-odds axis range, always includes 0
    for (const auto& r : rows) {
        lo = std::min(lo, r.lo);
        hi = std::max(hi, r.hi);
    }
    lo -= 0.25;
    hi += 0.25;

    const double plot_x0 = 180.0, plot_x1 = 690.0;
    const double row_h = 26.0, top = 46.0;
    const double height = top + row_h * double(rows.size()) + 44.0;
    const auto xpos = [&](double d) {
        return plot_x0 + (d - lo) / (hi - lo) * (plot_x1 - plot_x0);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\""
        << fmt(height, "%.0f") << "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg << "<text x=\"" << fmt(plot_x0) << "\" y=\"20\">odds ratio (log scale)</text>\n";
    // Reference line OR = 1.
    svg << "<line x1=\"" << fmt(xpos(0.0)) << "\" y1=\"" << fmt(top - 12.0)
        << "\" x2=\"" << fmt(xpos(0.0)) << "\" y2=\""
        << fmt(top + row_h * double(rows.size())) << "\" stroke=\"#888888\" "
        << "stroke-dasharray=\"4,3\"/>\n";
    // Axis ticks at OR in {0.25, 0.5, 1, 2, 4} that fall inside range.
    const double tick_or[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const double axis_y = top + row_h * double(rows.size()) + 8.0;
    svg << "<line x1=\"" << fmt(plot_x0) << "\" y1=\"" << fmt(axis_y) << "\" x2=\""
        << fmt(plot_x1) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"#000000\"/>\n";
    for (double t : tick_or) {
        const double d = std::log(t);
        if (d < lo || d > hi) continue;
        svg << "<line x1=\"" << fmt(xpos(d)) << "\" y1=\"" << fmt(axis_y) << "\" x2=\""
            << fmt(xpos(d)) << "\" y2=\"" << fmt(axis_y + 5.0)
            << "\" stroke=\"#000000\"/>\n";
        svg << "<text x=\"" << fmt(xpos(d) - 8.0) << "\" y=\"" << fmt(axis_y + 18.0)
            << "\">" << fmt(t, "%.2g") << "</text>\n";
    }

    std::ostringstream text;
    text << "method/study        OR [95% interval]\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const double y = top + row_h * double(i) + row_h * 0.5;
        svg << "<text x=\"12\" y=\"" << fmt(y + 4.0) << "\""
            << (r.summary ? " font-weight=\"bold\"" : "") << ">" << r.label
            << "</text>\n";
        svg << "<line x1=\"" << fmt(xpos(r.lo)) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(xpos(r.hi)) << "\" y2=\"" << fmt(y) << "\" stroke=\"#000000\"/>\n";
        if (r.summary) {
            const double cx = xpos(r.log_or);
            svg << "<polygon points=\"" << fmt(cx - 6.0) << "," << fmt(y) << " "
                << fmt(cx) << "," << fmt(y - 6.0) << " " << fmt(cx + 6.0) << ","
                << fmt(y) << " " << fmt(cx) << "," << fmt(y + 6.0)
                << "\" fill=\"#000000\"/>\n";
        } else {
            svg << "<rect x=\"" << fmt(xpos(r.log_or) - 3.5) << "\" y=\""
                << fmt(y - 3.5) << "\" width=\"7\" height=\"7\" fill=\"#444444\"/>\n";
        }
        svg << "<text x=\"" << fmt(plot_x1 + 14.0) << "\" y=\"" << fmt(y + 4.0) << "\">"
            << fmt(std::exp(r.log_or)) << " [" << fmt(std::exp(r.lo)) << ", "
            << fmt(std::exp(r.hi)) << "]</text>\n";

        char line[160];
        std::snprintf(line, sizeof(line), "%-18s %8.3f [%8.3f, %8.3f]%s\n",
                      r.label.c_str(), std::exp(r.log_or), std::exp(r.lo),
                      std::exp(r.hi), r.summary ? "  <summary>" : "");
        text << line;
    }
    svg << "</svg>\n";
    return {svg.str(), text.str()};
}

std::string comparison_table_csv(const MetaResult& naive, const MetaResult& uree) {
    std::ostringstream out;
    out << "parameter,mean_naive,mean_uree,sd_naive,sd_uree\n";
    const auto row = [&](const char* name, double mn, double mu, double sn, double su) {
        char line[200];
        std::snprintf(line, sizeof(line), "%s,%.6g,%.6g,%.6g,%.6g\n", name, mn, mu, sn,
                      su);
        out << line;
    };
    row("d", naive.d_mean, uree.d_mean, naive.d_sd, uree.d_sd);
    row("sigma2", naive.sigma2_mean, uree.sigma2_mean, naive.sigma2_sd, uree.sigma2_sd);
    row("m", naive.m_mean, uree.m_mean, naive.m_sd, uree.m_sd);
    row("tau2", naive.tau2_mean, uree.tau2_mean, naive.tau2_sd, uree.tau2_sd);
    return out.str();
}

} // namespace metaor
