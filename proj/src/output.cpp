#include "graphflow/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "graphflow/error.hpp"

namespace graphflow {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// One row per step n (records n and n + 1 bracket it); the terminal record
// only supplies energy_next of the last row.
template <class Records, class Extra>
std::string records_csv(const Records& records, std::size_t stride, const std::string& head,
                        const std::vector<std::string>& per_species, Extra&& extra) {
  std::ostringstream os;
  os << head;
  const std::size_t n_species = records.empty() ? 0 : records.front().mass.size();
  for (std::size_t i = 0; i < n_species; ++i)
    for (const auto& name : per_species) os << ',' << name << '_' << (i + 1);
  os << '\n';
  stride = std::max<std::size_t>(stride, 1);
  const std::size_t steps = records.empty() ? 0 : records.size() - 1;
  for (std::size_t n = 0; n < steps; ++n) {
    if (n % stride != 0 && n + 1 != steps) continue;
    os << n;
    extra(os, records[n], records[n + 1].energy);
    os << '\n';
  }
  return os.str();
}

std::string grid_header(const SpatialGrid& grid) { return grid.dim() == 2 ? "x1,x2" : "x1"; }

void grid_point(std::ostringstream& os, const SpatialGrid& grid, std::size_t k) {
  const Vec2 c = grid.center(k);
  os << format_double(c[0]);
  if (grid.dim() == 2) os << ',' << format_double(c[1]);
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, std::size_t stride) {
  return records_csv(traj.records, stride, "step,t,dt,energy,energy_next,slope,action,residual",
                     {"mass", "min_density", "second_moment"}, [](std::ostringstream& os, const StepRecord& r, double next) {
                       os << ',' << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.energy)
                          << ',' << format_double(next) << ',' << format_double(r.slope) << ',' << format_double(r.action) << ','
                          << format_double(r.residual);
                       for (std::size_t i = 0; i < r.mass.size(); ++i)
                         os << ',' << format_double(r.mass[i]) << ',' << format_double(r.min_density[i]) << ','
                            << format_double(r.second_moment[i]);
                     });
}

std::string local_trajectory_csv(const LocalTrajectory& traj, std::size_t stride) {
  return records_csv(traj.records, stride, "step,t,dt,energy,energy_next,slope,action,power,residual",
                     {"mass", "min_density", "variance"}, [](std::ostringstream& os, const LocalStepRecord& r, double next) {
                       os << ',' << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.energy)
                          << ',' << format_double(next) << ',' << format_double(r.slope) << ',' << format_double(r.action) << ','
                          << format_double(r.power) << ',' << format_double(r.residual);
                       for (std::size_t i = 0; i < r.mass.size(); ++i)
                         os << ',' << format_double(r.mass[i]) << ',' << format_double(r.min_density[i]) << ','
                            << format_double(r.variance[i]);
                     });
}

std::string graph_states_csv(const std::vector<GraphSnapshot>& snapshots, const SpatialGrid& grid) {
  std::ostringstream os;
  os << "step,t,node," << grid_header(grid);
  const std::size_t n_species = snapshots.empty() ? 0 : snapshots.front().state.species();
  for (std::size_t i = 0; i < n_species; ++i) os << ",r_" << (i + 1);
  os << '\n';
  for (const auto& s : snapshots) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      os << s.step << ',' << format_double(s.t) << ',' << k << ',';
      grid_point(os, grid, k);
      for (const auto& r : s.state.r) os << ',' << format_double(r[k]);
      os << '\n';
    }
  }
  return os.str();
}

std::string local_states_csv(const std::vector<LocalSnapshot>& snapshots, const SpatialGrid& grid) {
  std::ostringstream os;
  os << "step,t,cell," << grid_header(grid);
  const std::size_t n_species = snapshots.empty() ? 0 : snapshots.front().state.species();
  for (std::size_t i = 0; i < n_species; ++i) os << ",rho_" << (i + 1);
  os << '\n';
  for (const auto& s : snapshots) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      os << s.step << ',' << format_double(s.t) << ',' << k << ',';
      grid_point(os, grid, k);
      for (const auto& r : s.state.rho) os << ',' << format_double(r[k]);
      os << '\n';
    }
  }
  return os.str();
}

std::string tensor_csv(const SpatialGrid& grid, const std::vector<std::pair<std::string, const TensorField*>>& fields) {
  std::ostringstream os;
  os << "node," << grid_header(grid);
  for (const auto& [label, f] : fields) {
    if (grid.dim() == 1) {
      os << ',' << label << "_T11";
    } else {
      os << ',' << label << "_T11," << label << "_T12," << label << "_T22";
    }
  }
  os << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << k << ',';
    grid_point(os, grid, k);
    for (const auto& entry : fields) {
      const SmallMatrix& t = (*entry.second)[k];
      os << ',' << format_double(t(0, 0));
      if (grid.dim() == 2) os << ',' << format_double(t(0, 1)) << ',' << format_double(t(1, 1));
    }
    os << '\n';
  }
  return os.str();
}

std::string tensor_error_csv(const std::vector<double>& epsilons, const std::vector<double>& errors) {
  std::ostringstream os;
  os << "epsilon,max_frobenius_error\n";
  for (std::size_t i = 0; i < epsilons.size() && i < errors.size(); ++i)
    os << format_double(epsilons[i]) << ',' << format_double(errors[i]) << '\n';
  return os.str();
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "epsilon,species,distance_T,tensor_err,degiorgi_graph,degiorgi_local,l_eps_err,runtime_s\n";
  for (const auto& r : report.rows) {
    os << format_double(r.epsilon) << ',' << r.species << ',' << format_double(r.distance_T) << ','
       << format_double(r.tensor_err) << ',' << format_double(r.degiorgi_graph) << ','
       << format_double(r.degiorgi_local) << ',' << format_double(r.l_eps_err) << ',' << format_double(r.runtime_s)
       << '\n';
  }
  return os.str();
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x, bool log_y) {
  const double width = 640.0, height = 420.0;
  const double left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0.0) && (!log_y || y > 0.0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
  if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
     << "\" viewBox=\"0 0 " << fixed(width, 0) << ' ' << fixed(height, 0) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
     << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = left + pw * i / 4.0;
    const double sy = top + ph - ph * i / 4.0;
    const double vx = log_x ? std::pow(10.0, fx) : fx;
    const double vy = log_y ? std::pow(10.0, fy) : fy;
    os << "<line x1=\"" << fixed(sx) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(sx) << "\" y2=\""
       << fixed(top + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(sx) << "\" y=\"" << fixed(top + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(vx) << "</text>\n";
    os << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(sy) << "\" x2=\"" << fixed(left) << "\" y2=\""
       << fixed(sy) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(sy + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(vy) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 10)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\" transform=\"rotate(-90 16 " << fixed(top + ph / 2) << ")\">" << escape_xml(y_label)
     << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!usable(series[s].x[i], series[s].y[i])) continue;
      os << (first ? "" : " ") << fixed(px(series[s].x[i])) << ',' << fixed(py(series[s].y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 16.0 + 16.0 * s;
    os << "<line x1=\"" << fixed(left + pw - 130) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw - 110)
       << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed(left + pw - 104) << "\" y=\"" << fixed(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + path);
}

}  // namespace graphflow
