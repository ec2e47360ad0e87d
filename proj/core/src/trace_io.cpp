#include "hyltl/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace hyltl {

namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

json trace_to_json(const Trace& trace) {
  const HybridArc& arc = trace.arc;
  json doc;
  doc["dim"] = arc.dim();
  json phases = json::array();
  for (const Phase& ph : arc.domain().phases()) {
    phases.push_back({{"j", ph.j}, {"t_start", ph.t_start}, {"t_end", ph.t_end}});
  }
  doc["phases"] = std::move(phases);
  json samples = json::array();
  for (std::size_t i = 0; i < arc.sample_count(); ++i) {
    auto s = arc.sample(i);
    samples.push_back({{"t", s.t}, {"j", s.j}, {"x", *s.x}});
  }
  doc["samples"] = std::move(samples);
  doc["meta"] = trace.meta;
  return doc;
}

Trace trace_from_json(const json& doc) {
  try {
    int dim = doc.at("dim").get<int>();
    std::vector<Phase> phases;
    for (const json& p : doc.at("phases"))
      phases.push_back({p.at("j").get<std::int64_t>(), p.at("t_start").get<double>(),
                        p.at("t_end").get<double>()});
    HybridTimeDomain domain(phases);

    std::vector<HybridArc::PhaseSamples> samples(phases.size());
    for (const json& s : doc.at("samples")) {
      std::int64_t j = s.at("j").get<std::int64_t>();
      if (j < 0 || static_cast<std::size_t>(j) >= phases.size())
        raise(errc::bad_config, "sample refers to a phase outside the domain");
      StateVec x = s.at("x").get<StateVec>();
      if (static_cast<int>(x.size()) != dim)
        raise(errc::bad_config, "sample dimension does not match dim");
      samples[static_cast<std::size_t>(j)].emplace_back(s.at("t").get<double>(), std::move(x));
    }

    Trace trace;
    trace.arc = HybridArc(std::move(domain), std::move(samples));
    if (doc.contains("meta"))
      trace.meta = doc.at("meta").get<TraceMeta>();
    return trace;
  } catch (const json::exception& e) {
    raise(errc::bad_config, std::string("malformed trace document: ") + e.what());
  }
}

}  // namespace

std::string write_trace(const Trace& trace) {
  return trace_to_json(trace).dump(2) + "\n";
}

Trace read_trace(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) raise(errc::bad_config, "trace document is not valid JSON");
  return trace_from_json(doc);
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open " + path + " for writing");
  out << write_trace(trace);
  if (!out) raise(errc::io_error, "failed while writing " + path);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_trace(buf.str());
}

void write_csv(const HybridArc& arc, std::ostream& out) {
  out << "t,j";
  for (int k = 1; k <= arc.dim(); ++k) out << ",x" << k;
  out << "\n";
  for (std::size_t i = 0; i < arc.sample_count(); ++i) {
    auto s = arc.sample(i);
    out << shortest(s.t) << "," << s.j;
    for (double v : *s.x) out << "," << shortest(v);
    out << "\n";
  }
}

void save_csv(const HybridArc& arc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open " + path + " for writing");
  write_csv(arc, out);
  if (!out) raise(errc::io_error, "failed while writing " + path);
}

}  // namespace hyltl
