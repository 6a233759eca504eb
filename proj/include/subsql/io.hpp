#pragma once

// Byte-stable output: CSV writers with pinned numeric formatting, a
// self-contained SVG plot writer, and the matching noise-CSV reader.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "modal.hpp"
#include "noise.hpp"
#include "pipeline.hpp"

namespace subsql {

namespace fmt {

inline std::string num(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string e9(double v) { return num("%.9e", v); }
inline std::string e12(double v) { return num("%.12e", v); }
inline std::string f2(double v) { return num("%.2f", v); }

} // namespace fmt

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    return os;
}

inline void finish_output(std::ostream& os, const std::string& what) {
    os.flush();
    if (!os) throw io_error("write failed: " + what);
}

// ---- CSV writers -----------------------------------------------------------

inline void write_noise_csv(std::ostream& os, const NoiseSpectrum& tn,
                            const NoiseSpectrum& sql) {
    if (!tn.grid.same_as(sql.grid))
        throw arg_error("noise csv: spectra live on different grids");
    if (tn.asd.size() != tn.grid.size() || sql.asd.size() != sql.grid.size())
        throw arg_error("noise csv: spectrum length mismatch");
    os << "frequency_hz,tn_asd_m_rthz,sql_asd_m_rthz,ratio_sql_over_tn\n";
    for (std::size_t i = 0; i < tn.grid.size(); ++i) {
        os << fmt::e9(tn.grid.frequencies[i]) << ',' << fmt::e9(tn.asd[i]) << ','
           << fmt::e9(sql.asd[i]) << ',' << fmt::e9(sql.asd[i] / tn.asd[i]) << '\n';
    }
    finish_output(os, "noise csv");
}

inline void write_modes_csv(std::ostream& os, const std::vector<Mode>& modes,
                            const std::vector<ModeReadout>& readouts) {
    if (modes.size() != readouts.size())
        throw arg_error("modes csv: modes and readouts differ in length");
    os << "mode_index,label,frequency_hz,m_eff_kg,coupled\n";
    for (std::size_t i = 0; i < modes.size(); ++i) {
        os << modes[i].index << ',' << to_string(modes[i].label) << ','
           << fmt::e9(modes[i].frequency_hz) << ',' << fmt::e9(readouts[i].m_eff_kg) << ','
           << (readouts[i].coupled ? 1 : 0) << '\n';
    }
    finish_output(os, "modes csv");
}

// One data row when a sub-unity band exists, header only otherwise.
inline void write_metrics_csv(std::ostream& os, const std::optional<SubSqlMetrics>& m) {
    os << "r_max,f_max_hz,f_l_hz,f_h_hz,bwe,dip_count\n";
    if (m) {
        os << fmt::e9(m->r_max) << ',' << fmt::e9(m->f_max_hz) << ',' << fmt::e9(m->f_l_hz)
           << ',' << fmt::e9(m->f_h_hz) << ',' << fmt::e9(m->bwe) << ',' << m->dip_count
           << '\n';
    }
    finish_output(os, "metrics csv");
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << "param,value,f1_hz,f_pitch_hz,f_high_hz,r_max,f_max_hz,f_l_hz,f_h_hz,bwe,"
          "dip_count\n";
    for (const SweepRow& r : sweep.rows) {
        os << to_string(sweep.parameter) << ',' << fmt::e9(r.value) << ',' << fmt::e9(r.f1_hz)
           << ',' << fmt::e9(r.f_pitch_hz) << ',' << fmt::e9(r.f_high_hz) << ','
           << fmt::e9(r.r_max) << ',' << fmt::e9(r.f_max_hz) << ',' << fmt::e9(r.f_l_hz)
           << ',' << fmt::e9(r.f_h_hz) << ',' << fmt::e9(r.bwe) << ',' << r.dip_count << '\n';
    }
    finish_output(os, "sweep csv");
}

inline void write_design_csv(std::ostream& os, const std::vector<DesignRun>& runs) {
    os << "seed,t_gaas_nm,t_algaas_nm,achieved_ppm,evaluations,converged\n";
    for (const DesignRun& r : runs) {
        os << r.seed << ',' << fmt::e9(r.result.t_gaas_nm) << ','
           << fmt::e9(r.result.t_algaas_nm) << ',' << fmt::e9(r.result.achieved_ppm) << ','
           << r.result.evaluations << ',' << (r.result.converged ? 1 : 0) << '\n';
    }
    finish_output(os, "design csv");
}

// ---- noise CSV reader ------------------------------------------------------

namespace detail {

inline double parse_field(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
        throw io_error("noise csv: bad number '" + s + "' on line " +
                       std::to_string(line_no));
    return v;
}

} // namespace detail

// Reads frequencies and the ratio column back from a noise CSV.
inline void read_noise_csv(std::istream& is, std::vector<double>& frequencies,
                           std::vector<double>& ratio) {
    frequencies.clear();
    ratio.clear();
    std::string line;
    if (!std::getline(is, line)) throw io_error("noise csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "frequency_hz,tn_asd_m_rthz,sql_asd_m_rthz,ratio_sql_over_tn")
        throw io_error("noise csv: unexpected header '" + line + "'");
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 4)
            throw io_error("noise csv: expected 4 fields on line " + std::to_string(line_no));
        frequencies.push_back(detail::parse_field(fields[0], line_no));
        ratio.push_back(detail::parse_field(fields[3], line_no));
    }
    if (frequencies.size() < 2) throw io_error("noise csv: need at least 2 data rows");
}

inline void read_noise_csv_file(const std::string& path, std::vector<double>& frequencies,
                                std::vector<double>& ratio) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open '" + path + "' for reading");
    read_noise_csv(is, frequencies, ratio);
}

// ---- SVG plot --------------------------------------------------------------

namespace detail {

struct AxisMap {
    double lo = 0.0, hi = 1.0;  // log10 domain
    double p0 = 0.0, p1 = 1.0;  // pixel range

    double operator()(double v) const {
        return p0 + (std::log10(v) - lo) / (hi - lo) * (p1 - p0);
    }
};

inline void polyline(std::ostream& os, const std::vector<double>& x,
                     const std::vector<double>& y, const AxisMap& xm, const AxisMap& ym,
                     const char* style) {
    os << "  <polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ' ';
        os << fmt::f2(xm(x[i])) << ',' << fmt::f2(ym(y[i]));
    }
    os << "\"/>\n";
}

} // namespace detail

// Self-contained log-log plot of the thermal and quantum-reference curves.
// When metrics are present the band between the unity crossings is shaded
// (class "subsql-band"); otherwise no band element is emitted.
inline void write_noise_svg(std::ostream& os, const NoiseSpectrum& tn,
                            const NoiseSpectrum& sql,
                            const std::optional<SubSqlMetrics>& metrics) {
    if (!tn.grid.same_as(sql.grid))
        throw arg_error("noise svg: spectra live on different grids");
    if (tn.grid.size() < 2) throw arg_error("noise svg: need at least 2 grid points");

    constexpr double width = 840.0, height = 560.0;
    constexpr double ml = 70.0, mr = 20.0, mt = 20.0, mb = 50.0;
    const double x0 = ml, x1 = width - mr;
    const double y_top = mt, y_bot = height - mb;

    const std::vector<double>& f = tn.grid.frequencies;
    double a_lo = tn.asd[0], a_hi = tn.asd[0];
    for (double v : tn.asd) {
        a_lo = std::min(a_lo, v);
        a_hi = std::max(a_hi, v);
    }
    for (double v : sql.asd) {
        a_lo = std::min(a_lo, v);
        a_hi = std::max(a_hi, v);
    }
    double la0 = std::log10(a_lo), la1 = std::log10(a_hi);
    if (la1 - la0 < 1e-12) {
        la0 -= 0.5;
        la1 += 0.5;
    }
    const double pad = 0.05 * (la1 - la0);
    la0 -= pad;
    la1 += pad;

    const detail::AxisMap xm{std::log10(f.front()), std::log10(f.back()), x0, x1};
    const detail::AxisMap ym{la0, la1, y_bot, y_top};

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"840\" height=\"560\" "
          "viewBox=\"0 0 840 560\">\n";
    os << "  <rect x=\"0\" y=\"0\" width=\"840\" height=\"560\" fill=\"#ffffff\"/>\n";

    if (metrics) {
        const double bx0 = xm(metrics->f_l_hz);
        const double bx1 = xm(metrics->f_h_hz);
        os << "  <rect class=\"subsql-band\" x=\"" << fmt::f2(bx0) << "\" y=\""
           << fmt::f2(y_top) << "\" width=\"" << fmt::f2(bx1 - bx0) << "\" height=\""
           << fmt::f2(y_bot - y_top) << "\" fill=\"#cfe8d5\"/>\n";
    }

    const int dx0 = static_cast<int>(std::ceil(xm.lo - 1e-9));
    const int dx1 = static_cast<int>(std::floor(xm.hi + 1e-9));
    for (int d = dx0; d <= dx1; ++d) {
        const double px = xm(std::pow(10.0, d));
        os << "  <line x1=\"" << fmt::f2(px) << "\" y1=\"" << fmt::f2(y_top) << "\" x2=\""
           << fmt::f2(px) << "\" y2=\"" << fmt::f2(y_bot)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "  <text x=\"" << fmt::f2(px) << "\" y=\"" << fmt::f2(y_bot + 18.0)
           << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">1e" << d
           << "</text>\n";
    }
    const int dy0 = static_cast<int>(std::ceil(la0 - 1e-9));
    const int dy1 = static_cast<int>(std::floor(la1 + 1e-9));
    for (int d = dy0; d <= dy1; ++d) {
        const double py = ym(std::pow(10.0, d));
        os << "  <line x1=\"" << fmt::f2(x0) << "\" y1=\"" << fmt::f2(py) << "\" x2=\""
           << fmt::f2(x1) << "\" y2=\"" << fmt::f2(py)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "  <text x=\"" << fmt::f2(x0 - 6.0) << "\" y=\"" << fmt::f2(py + 4.0)
           << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">1e" << d
           << "</text>\n";
    }

    detail::polyline(os, f, tn.asd, xm, ym,
                     "stroke=\"#c0392b\" stroke-width=\"1.5\"");
    detail::polyline(os, f, sql.asd, xm, ym,
                     "stroke=\"#2c3e50\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"");

    os << "  <rect x=\"" << fmt::f2(x0) << "\" y=\"" << fmt::f2(y_top) << "\" width=\""
       << fmt::f2(x1 - x0) << "\" height=\"" << fmt::f2(y_bot - y_top)
       << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    os << "  <text x=\"" << fmt::f2((x0 + x1) / 2.0) << "\" y=\"" << fmt::f2(height - 12.0)
       << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">frequency "
          "(Hz)</text>\n";
    os << "  <text x=\"16\" y=\"" << fmt::f2((y_top + y_bot) / 2.0)
       << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 16 "
       << fmt::f2((y_top + y_bot) / 2.0) << ")\">ASD (m/Hz^0.5)</text>\n";
    os << "  <text x=\"" << fmt::f2(x1 - 8.0) << "\" y=\"" << fmt::f2(y_top + 16.0)
       << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\" "
          "fill=\"#c0392b\">thermal noise</text>\n";
    os << "  <text x=\"" << fmt::f2(x1 - 8.0) << "\" y=\"" << fmt::f2(y_top + 32.0)
       << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\" "
          "fill=\"#2c3e50\">standard quantum limit</text>\n";
    os << "</svg>\n";
    finish_output(os, "noise svg");
}

} // namespace subsql
