#include "kpz/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kpz/errors.hpp"

namespace kpz {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw IoError("table has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
}

std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + num(r[i]);
        s += "\n";
    }
    return s;
}

Table parse_csv(const std::string& text, const std::string& origin) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(origin + ": empty CSV");
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) t.columns.push_back(c);
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            if (c == "nan") {
                row.push_back(std::nan(""));
                continue;
            }
            double v = 0.0;
            const auto r = std::from_chars(c.data(), c.data() + c.size(), v);
            if (r.ec != std::errc() || r.ptr != c.data() + c.size())
                throw IoError(origin + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
            row.push_back(v);
        }
        if (row.size() != t.columns.size())
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                          " fields");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

std::string read_text(const std::string& path) {
    if (!fs::exists(path)) throw DependencyError("missing file " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Table read_csv(const std::string& path) { return parse_csv(read_text(path), path); }

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 150, kT = 40, kB = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 6.0) break;
    }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
    double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void pad(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double d = std::max(1.0, std::abs(lo)) * 0.5;
        lo -= d;
        hi += d;
        return;
    }
    const double d = 0.05 * (hi - lo);
    lo -= d;
    hi += d;
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
    std::ostringstream o;
    o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\"" << kH - kT - kB
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : ticks(f.x0, f.x1)) {
        const double x = f.px(t);
        o << "<line x1=\"" << x << "\" y1=\"" << kH - kB << "\" x2=\"" << x << "\" y2=\"" << kH - kB + 5
          << "\" stroke=\"#333\"/>\n<text x=\"" << x << "\" y=\"" << kH - kB + 18
          << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(t) << "</text>\n";
    }
    for (double t : ticks(f.y0, f.y1)) {
        const double y = f.py(t);
        o << "<line x1=\"" << kL - 5 << "\" y1=\"" << y << "\" x2=\"" << kL << "\" y2=\"" << y
          << "\" stroke=\"#333\"/>\n<text x=\"" << kL - 8 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(t) << "</text>\n";
    }
    o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kT - 14 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(title) << "</text>\n";
    o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << esc(xl) << "</text>\n";
    o << "<text transform=\"translate(16," << (kT + kH - kB) / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << esc(yl) << "</text>\n";
    return o.str();
}

std::string header() {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
      << kW << " " << kH << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return o.str();
}

// Dark blue through green to yellow, u in [0, 1].
std::string ramp(double u) {
    static const double stops[][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    u = std::clamp(u, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(u));
    const double w = u - i;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + w * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + w * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + w * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

}  // namespace

std::string render_svg(const Plot& p) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto grow = [](double& lo, double& hi, double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (const auto& s : p.series) {
        for (double v : s.x) grow(x0, x1, v);
        for (double v : s.y) grow(y0, y1, v);
        for (double v : s.lo) grow(y0, y1, v);
        for (double v : s.hi) grow(y0, y1, v);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    pad(y0, y1);
    if (!(x1 > x0)) pad(x0, x1);
    const Frame f{x0, x1, y0, y1};
    std::ostringstream o;
    o << header() << axes(f, p.title, p.xlabel, p.ylabel);
    for (std::size_t i = 0; i < p.series.size(); ++i) {
        const auto& s = p.series[i];
        const char* col = kPalette[i % std::size(kPalette)];
        if (!s.lo.empty() && s.lo.size() == s.x.size() && s.hi.size() == s.x.size()) {
            o << "<polygon fill=\"" << col << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t k = 0; k < s.x.size(); ++k) o << f.px(s.x[k]) << "," << f.py(s.hi[k]) << " ";
            for (std::size_t k = s.x.size(); k-- > 0;) o << f.px(s.x[k]) << "," << f.py(s.lo[k]) << " ";
            o << "\"/>\n";
        }
        if (s.points) {
            for (std::size_t k = 0; k < s.x.size(); ++k)
                if (std::isfinite(s.y[k]))
                    o << "<circle cx=\"" << f.px(s.x[k]) << "\" cy=\"" << f.py(s.y[k]) << "\" r=\"3\" fill=\"" << col
                      << "\"/>\n";
        } else {
            o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.6\" points=\"";
            for (std::size_t k = 0; k < s.x.size(); ++k)
                if (std::isfinite(s.y[k])) o << f.px(s.x[k]) << "," << f.py(s.y[k]) << " ";
            o << "\"/>\n";
        }
        const double ly = kT + 14 + 18 * static_cast<double>(i);
        o << "<rect x=\"" << kW - kR + 12 << "\" y=\"" << ly - 8 << "\" width=\"14\" height=\"4\" fill=\"" << col
          << "\"/>\n<text x=\"" << kW - kR + 32 << "\" y=\"" << ly << "\" font-size=\"11\">" << esc(s.label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string render_svg(const Heatmap& h) {
    if (h.xs.empty() || h.ys.empty() || h.values.size() != h.xs.size() * h.ys.size())
        throw DomainError("heat map: value count does not match the grid");
    double lo = INFINITY, hi = -INFINITY;
    for (double v : h.values)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (!(hi > lo)) hi = lo + 1;
    const double dx = h.xs.size() > 1 ? (h.xs.back() - h.xs.front()) / (h.xs.size() - 1) : 1.0;
    const double dy = h.ys.size() > 1 ? (h.ys.back() - h.ys.front()) / (h.ys.size() - 1) : 1.0;
    const Frame f{h.xs.front() - dx / 2, h.xs.back() + dx / 2, h.ys.front() - dy / 2, h.ys.back() + dy / 2};
    std::ostringstream o;
    o << header();
    for (std::size_t j = 0; j < h.ys.size(); ++j) {
        for (std::size_t i = 0; i < h.xs.size(); ++i) {
            const double v = h.values[j * h.xs.size() + i];
            const double xa = f.px(h.xs[i] - dx / 2), xb = f.px(h.xs[i] + dx / 2);
            const double ya = f.py(h.ys[j] + dy / 2), yb = f.py(h.ys[j] - dy / 2);
            o << "<rect x=\"" << xa << "\" y=\"" << ya << "\" width=\"" << xb - xa + 0.5 << "\" height=\"" << yb - ya + 0.5
              << "\" fill=\"" << (std::isfinite(v) ? ramp((v - lo) / (hi - lo)) : std::string("#cccccc"))
              << "\"/>\n";
        }
    }
    o << axes(f, h.title, h.xlabel, h.ylabel);
    const double bx = kW - kR + 20, bw = 18, btop = kT, bh = kH - kT - kB;
    for (int k = 0; k < 50; ++k) {
        o << "<rect x=\"" << bx << "\" y=\"" << btop + bh * (49 - k) / 50.0 << "\" width=\"" << bw << "\" height=\""
          << bh / 50.0 + 0.5 << "\" fill=\"" << ramp((k + 0.5) / 50.0) << "\"/>\n";
    }
    for (double t : ticks(lo, hi)) {
        const double y = btop + bh * (1.0 - (t - lo) / (hi - lo));
        o << "<text x=\"" << bx + bw + 4 << "\" y=\"" << y + 4 << "\" font-size=\"10\">" << short_num(t) << "</text>\n";
    }
    o << "<text transform=\"translate(" << kW - 8 << "," << (kT + kH - kB) / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << esc(h.value_label) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// Figures

namespace {

std::string stem(const std::string& csv_name) { return csv_name.substr(0, csv_name.size() - 4); }

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b, double k) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + k * b[i];
    return r;
}

std::string suffix_label(const std::string& s, const std::string& prefix) {
    std::string tag = s.substr(prefix.size());
    if (!tag.empty() && tag[0] == 'b') tag = tag.substr(1);
    std::replace(tag.begin(), tag.end(), 'p', '.');
    return tag;
}

}  // namespace

std::string figure_for(const std::string& csv_name, const Table& t) {
    const std::string s = stem(csv_name);
    if (starts_with(s, "g_")) {
        const auto x = t.values("x"), g = t.values("g"), se = t.values("g_se");
        Plot p{"variance curve g, beta = " + suffix_label(s, "g_"), "x", "Var h(x)", {}};
        p.series.push_back({"g +- 2 SE", x, g, add(g, se, -2), add(g, se, 2), false});
        return render_svg(p);
    }
    if (starts_with(s, "density_")) {
        const auto x = t.values("x"), d = t.values("gpp_over_2b2"), se = t.values("se");
        Plot p{"g''/(2 beta^2) and argmax density, beta = " + suffix_label(s, "density_"), "x", "density", {}};
        p.series.push_back({"g''/(2 beta^2)", x, d, add(d, se, -2), add(d, se, 2), true});
        p.series.push_back({"matched KDE", x, t.values("kde_stencil"), {}, {}, false});
        p.series.push_back({"Gaussian KDE", x, t.values("kde_gauss"), {}, {}, false});
        return render_svg(p);
    }
    if (starts_with(s, "two_point_")) {
        const auto z = t.values("z"), tt = t.values("t"), c = t.values("C"), se = t.values("C_se");
        Plot p{"two-point function C(z, t), beta = " + suffix_label(s, "two_point_"), "z", "C(z, t)", {}};
        std::map<double, Series> by_t;
        for (std::size_t i = 0; i < z.size(); ++i) {
            auto& ser = by_t[tt[i]];
            ser.label = "t = " + short_num(tt[i]);
            ser.x.push_back(z[i]);
            ser.y.push_back(c[i]);
            ser.lo.push_back(c[i] - 2 * se[i]);
            ser.hi.push_back(c[i] + 2 * se[i]);
        }
        for (auto& [k, ser] : by_t) p.series.push_back(std::move(ser));
        return render_svg(p);
    }
    if (s == "chernoff_ladder") {
        const auto b = t.values("beta"), ks = t.values("ks"), noise = t.values("noise");
        Plot p{"KS distance of beta^(-2/3) Z to the Chernoff law", "beta", "KS", {}};
        p.series.push_back({"KS +- 2 noise", b, ks, add(ks, noise, -2), add(ks, noise, 2), true});
        return render_svg(p);
    }
    if (starts_with(s, "stein_residual_")) {
        const auto x1 = t.values("x1"), x2 = t.values("x2"), r = t.values("residual");
        std::vector<double> xs = x1, ys = x2;
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        Heatmap h{"Stein residual, " + s.substr(15), "x1", "x2", "log10 |residual|", xs, ys,
                  std::vector<double>(xs.size() * ys.size(), std::nan(""))};
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto ix = std::lower_bound(xs.begin(), xs.end(), x1[i]) - xs.begin();
            const auto iy = std::lower_bound(ys.begin(), ys.end(), x2[i]) - ys.begin();
            h.values[iy * xs.size() + ix] = std::log10(std::max(std::abs(r[i]), 1e-18));
        }
        return render_svg(h);
    }
    if (s == "transport") {
        const auto tt = t.values("t"), joint = t.values("joint"), fl = t.values("floor");
        Plot p{"W1 per resample: joint vs product and product floor", "t", "W1", {}};
        p.series.push_back({"W1(joint, product)", tt, joint, {}, {}, true});
        p.series.push_back({"W1(product, product')", tt, fl, {}, {}, true});
        return render_svg(p);
    }
    return {};
}

std::vector<std::string> render_figures(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DependencyError("output directory " + dir + " does not exist");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::vector<std::string> written;
    for (const auto& n : names) {
        const auto t = read_csv((fs::path(dir) / n).string());
        const auto svg = figure_for(n, t);
        if (svg.empty()) continue;
        const auto out = stem(n) + ".svg";
        write_text((fs::path(dir) / out).string(), svg);
        written.push_back(out);
    }
    return written;
}

}  // namespace kpz
