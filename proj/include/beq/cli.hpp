#pragma once

// Batch front end: load one store, run each query file in the configured
// mode, and emit results, plan explanations, and statistics to streams.

#include <cstdint>
#include <exception>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "beq/executor.hpp"
#include "beq/parser.hpp"

namespace beq {

struct RunConfig {
  std::string dataPath;
  std::vector<std::string> queryPaths;
  ExecOptions::Mode mode = ExecOptions::Mode::Base;
  double thresholdRatio = 0.01;
  bool explain = false;
  bool stats = false;
  bool parallel = false;
  std::uint64_t seed = 1;
  std::int64_t timeoutUs = 2'000'000;
};

inline ExecOptions::Mode parse_mode(const std::string& s) {
  if (s == "base") return ExecOptions::Mode::Base;
  if (s == "tt") return ExecOptions::Mode::TT;
  if (s == "cp") return ExecOptions::Mode::CP;
  if (s == "full") return ExecOptions::Mode::Full;
  throw std::invalid_argument("unknown mode: " + s);
}

namespace detail {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string format_stats(const Query& q, const ExecStats& st) {
  std::ostringstream os;
  os << "{\"countBgp\": " << count_bgp(q.body)
     << ", \"depth\": " << depth(q.body)
     << ", \"joinSpace\": " << st.joinSpace
     << ", \"prunedBgpCount\": " << st.prunedBgpCount
     << ", \"wallTimeUs\": " << st.wallTime.count()
     << ", \"transformTimeUs\": " << st.transformTime.count() << "}";
  return os.str();
}

// One query file start to finish; throws on parse or evaluation failure.
inline void run_one(const Store& store, const std::string& path,
                    const RunConfig& cfg, std::ostream& out) {
  Query q = parse_query(read_text_file(path));
  ExecOptions opts;
  opts.mode = cfg.mode;
  opts.fixedRatio = cfg.thresholdRatio;
  opts.seed = cfg.seed;
  opts.timeoutUs = cfg.timeoutUs;
  PreparedQuery prep = prepare(store, q, opts);
  if (cfg.explain) {
    out << "-- plan\n" << prep.preText;
    if (!prep.tree.notes.empty()) {
      out << "-- hoist notes\n";
      for (const std::string& n : prep.tree.notes) out << n << "\n";
    }
    if (mode_transforms(cfg.mode)) {
      out << "-- transforms\n";
      if (prep.transforms.empty()) out << "(none)\n";
      for (const AppliedTransform& tr : prep.transforms)
        out << "delta=" << tr.delta << " " << tr.note << "\n";
      out << "-- transformed plan\n" << prep.postText;
    }
  }
  ExecResult res = evaluate(store, prep.tree, opts);
  res.stats.transformTime = prep.transformTime;

  std::vector<Variable> header = projection_vars(q);
  Bag rows = project_rows(res.rows, header);
  canonicalize(rows);  // row order is unspecified; sort for stable output
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "\t" : "") << header[i].name;
  out << "\n";
  for (const Mapping& m : rows.rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out << "\t";
      if (auto id = m.lookup(header[i])) out << to_string(store.term(*id));
    }
    out << "\n";
  }
  if (cfg.stats) out << format_stats(q, res.stats) << "\n";
}

}  // namespace detail

// Loads the store once, then runs every query; failures are reported on
// `err` and the remaining queries still run. Returns 0 only when all
// queries succeed.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!(cfg.thresholdRatio > 0.0) || cfg.thresholdRatio > 1.0) {
    err << "error: candidate threshold ratio must be in (0, 1]\n";
    return 1;
  }
  if (cfg.queryPaths.empty()) {
    err << "error: no query files given\n";
    return 1;
  }
  Store store;
  try {
    std::ifstream in(cfg.dataPath, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + cfg.dataPath);
    store = load_ntriples(in);
  } catch (const std::exception& e) {
    err << "error: " << cfg.dataPath << ": " << e.what() << "\n";
    return 1;
  }
  store.size();  // force the index build while still single-threaded

  auto one = [&](const std::string& path, std::ostream& o,
                 std::ostream& e) -> bool {
    o << "# query: " << path << "\n";
    try {
      detail::run_one(store, path, cfg, o);
      return true;
    } catch (const std::exception& ex) {
      e << "error: " << path << ": " << ex.what() << "\n";
      return false;
    }
  };

  bool failed = false;
  if (cfg.parallel && cfg.queryPaths.size() > 1) {
    struct Slot {
      std::ostringstream out, err;
      bool ok = true;
    };
    std::vector<Slot> slots(cfg.queryPaths.size());
    std::vector<std::future<void>> futs;
    futs.reserve(slots.size());
    for (std::size_t i = 0; i < cfg.queryPaths.size(); ++i)
      futs.push_back(std::async(std::launch::async, [&, i] {
        slots[i].ok = one(cfg.queryPaths[i], slots[i].out, slots[i].err);
      }));
    for (auto& f : futs) f.get();
    for (Slot& s : slots) {
      out << s.out.str();
      err << s.err.str();
      if (!s.ok) failed = true;
    }
  } else {
    for (const std::string& path : cfg.queryPaths)
      if (!one(path, out, err)) failed = true;
  }
  return failed ? 1 : 0;
}

}  // namespace beq
