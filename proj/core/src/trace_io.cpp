#include "projdyn/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace projdyn {
namespace {

void append_vector_columns(std::vector<std::string>& cols, const char* prefix,
                           Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    cols.push_back(prefix + std::to_string(i));
  }
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v,
                  Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    out << ',' << format_double(i < v.size() ? v(i) : std::nan(""));
  }
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json json_vector(const Eigen::VectorXd& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json_number(v(i)));
  return arr;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::vector<std::string> csv_columns(Eigen::Index n, Eigen::Index k) {
  std::vector<std::string> cols{"t"};
  append_vector_columns(cols, "q", n);
  append_vector_columns(cols, "qd", n);
  append_vector_columns(cols, "qdd", n);
  append_vector_columns(cols, "f", n);
  append_vector_columns(cols, "u", k);
  append_vector_columns(cols, "fc", n);
  for (const char* c : {"kinetic", "potential", "total", "lyapunov", "rank",
                        "cond", "mu", "drift_vel", "drift_pos"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::vector<std::string> jsonl_fields() {
  return {"t",        "q",         "qdot",     "qddot", "force",
          "u",        "constraint_force",      "kinetic", "potential",
          "total",    "lyapunov",  "rank",     "cond",  "mu",
          "drift_velocity",        "drift_position"};
}

void write_csv(const SimulationTrace& trace, std::ostream& out) {
  const auto cols = csv_columns(trace.n, trace.k);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i == 0 ? "" : ",") << cols[i];
  }
  out << '\n';
  for (const TraceRecord& r : trace.records) {
    out << format_double(r.t);
    write_vector(out, r.q, trace.n);
    write_vector(out, r.qdot, trace.n);
    write_vector(out, r.qddot, trace.n);
    write_vector(out, r.force, trace.n);
    write_vector(out, r.u, trace.k);
    write_vector(out, r.constraint_force, trace.n);
    for (double v : {r.kinetic, r.potential, r.total, r.lyapunov}) {
      out << ',' << format_double(v);
    }
    out << ',' << r.rank;
    for (double v : {r.cond, r.mu, r.drift_velocity, r.drift_position}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

void write_jsonl(const SimulationTrace& trace, std::ostream& out) {
  for (const TraceRecord& r : trace.records) {
    // ordered_json keeps the documented field order.
    nlohmann::ordered_json rec;
    rec["t"] = r.t;
    rec["q"] = json_vector(r.q);
    rec["qdot"] = json_vector(r.qdot);
    rec["qddot"] = json_vector(r.qddot);
    rec["force"] = json_vector(r.force);
    rec["u"] = json_vector(r.u);
    rec["constraint_force"] = json_vector(r.constraint_force);
    rec["kinetic"] = json_number(r.kinetic);
    rec["potential"] = json_number(r.potential);
    rec["total"] = json_number(r.total);
    rec["lyapunov"] = json_number(r.lyapunov);
    rec["rank"] = r.rank;
    rec["cond"] = json_number(r.cond);
    rec["mu"] = json_number(r.mu);
    rec["drift_velocity"] = json_number(r.drift_velocity);
    rec["drift_position"] = json_number(r.drift_position);
    out << rec.dump() << '\n';
  }
}

}  // namespace projdyn
