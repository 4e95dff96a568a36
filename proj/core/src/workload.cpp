#include "pdsim/workload.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <random>
#include <set>
#include <string_view>

#include "pdsim/error.hpp"

namespace pdsim {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view v, const std::string& where) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(fmt::format("{}: bad number \"{}\"", where, v));
  }
  return out;
}

std::size_t parse_positive(std::string_view v, const std::string& where) {
  const auto n = parse_number<long long>(v, where);
  if (n <= 0) throw Error(fmt::format("{}: must be positive, got {}", where, n));
  return static_cast<std::size_t>(n);
}

QuantizedMatrix load_operand(const std::string& path, int bits) {
  if (fs::path(path).extension() == ".qmat") return load_qmat(path);
  return quantize(load_real_text(path), QuantSpec::per_tensor_max(bits));
}

}  // namespace

WorkloadSpec parse_workload_spec(std::istream& in, const std::string& source,
                                 const std::string& base_dir) {
  WorkloadSpec s;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(fmt::format("{}:{}: expected key = value", source, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto where = fmt::format("{}:{}: key \"{}\"", source, line_no, key);
    if (!seen.insert(key).second) throw Error(fmt::format("{} set twice", where));
    auto path = [&] { return (fs::path(base_dir) / std::string(value)).lexically_normal().string(); };

    if (key == "seq_len") {
      s.seq_len = parse_positive(value, where);
    } else if (key == "d_k") {
      s.d_k = parse_positive(value, where);
    } else if (key == "heads") {
      s.heads = parse_positive(value, where);
    } else if (key == "batch") {
      s.batch = parse_positive(value, where);
    } else if (key == "bits") {
      s.bits = parse_number<int>(value, where);
      if (s.bits < 2 || s.bits > 8) throw Error(fmt::format("{}: must be in [2, 8]", where));
    } else if (key == "seed") {
      s.seed = parse_number<uint64_t>(value, where);
    } else if (key == "source") {
      if (value == "synthetic") {
        s.source = WorkloadSource::Synthetic;
      } else if (value == "files") {
        s.source = WorkloadSource::Files;
      } else {
        throw Error(fmt::format("{}: expected synthetic or files, got \"{}\"", where, value));
      }
    } else if (key == "distribution") {
      if (value == "gaussian") {
        s.distribution = Distribution::Gaussian;
      } else if (value == "uniform") {
        s.distribution = Distribution::Uniform;
      } else {
        throw Error(fmt::format("{}: expected gaussian or uniform, got \"{}\"", where, value));
      }
    } else if (key == "sigma" || key == "range") {
      const auto x = parse_number<double>(value, where);
      if (!(x >= 0.0) || !std::isfinite(x)) throw Error(fmt::format("{}: must be >= 0", where));
      (key == "sigma" ? s.sigma : s.range) = x;
    } else if (key == "q_path") {
      s.q_path = path();
    } else if (key == "k_path") {
      s.k_path = path();
    } else if (key == "v_path") {
      s.v_path = path();
    } else {
      throw Error(fmt::format("{}:{}: unknown key \"{}\"", source, line_no, key));
    }
  }
  if (s.source == WorkloadSource::Files && (s.q_path.empty() || s.k_path.empty() || s.v_path.empty())) {
    throw Error(fmt::format("{}: source = files needs q_path, k_path and v_path", source));
  }
  return s;
}

WorkloadSpec load_workload_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path));
  return parse_workload_spec(in, path, fs::path(path).parent_path().string());
}

std::string echo_workload_spec(const WorkloadSpec& s) {
  std::string out = fmt::format("seq_len = {}\nd_k = {}\nheads = {}\nbatch = {}\nbits = {}\n",
                                s.seq_len, s.d_k, s.heads, s.batch, s.bits);
  if (s.seed) out += fmt::format("seed = {}\n", *s.seed);
  if (s.source == WorkloadSource::Files) {
    out += fmt::format("source = files\nq_path = {}\nk_path = {}\nv_path = {}\n", s.q_path,
                       s.k_path, s.v_path);
  } else if (s.distribution == Distribution::Gaussian) {
    out += fmt::format("source = synthetic\ndistribution = gaussian\nsigma = {}\n", s.sigma);
  } else {
    out += fmt::format("source = synthetic\ndistribution = uniform\nrange = {}\n", s.range);
  }
  return out;
}

AttentionWorkload gen_workload(const WorkloadSpec& spec, uint64_t seed) {
  AttentionWorkload w;
  w.seq_len = spec.seq_len;
  w.d_k = spec.d_k;
  w.heads = spec.heads;
  w.batch = spec.batch;
  if (spec.source == WorkloadSource::Files) {
    w.q = load_operand(spec.q_path, spec.bits);
    w.k = load_operand(spec.k_path, spec.bits);
    w.v = load_operand(spec.v_path, spec.bits);
    w.validate();
    return w;
  }
  const std::size_t rows = w.blocks() * w.seq_len;
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    RealMatrix m = RealMatrix::zeros(rows, w.d_k);
    if (spec.distribution == Distribution::Gaussian) {
      if (spec.sigma > 0.0) {
        std::normal_distribution<double> d(0.0, spec.sigma);
        for (double& x : m.values) x = d(rng);
      }
    } else if (spec.range > 0.0) {
      std::uniform_real_distribution<double> d(-spec.range, spec.range);
      for (double& x : m.values) x = d(rng);
    }
    return quantize(m, QuantSpec::per_tensor_max(spec.bits));
  };
  w.q = draw();
  w.k = draw();
  w.v = draw();
  return w;
}

void save_workload(const AttentionWorkload& w, const std::string& dir) {
  w.validate();
  fs::create_directories(dir);
  save_qmat((fs::path(dir) / "q.qmat").string(), w.q);
  save_qmat((fs::path(dir) / "k.qmat").string(), w.k);
  save_qmat((fs::path(dir) / "v.qmat").string(), w.v);
  WorkloadSpec s;
  s.seq_len = w.seq_len;
  s.d_k = w.d_k;
  s.heads = w.heads;
  s.batch = w.batch;
  s.bits = w.q.bits();
  s.source = WorkloadSource::Files;
  s.q_path = "q.qmat";
  s.k_path = "k.qmat";
  s.v_path = "v.qmat";
  std::ofstream out(fs::path(dir) / "workload.cfg");
  if (!out) throw Error(fmt::format("{}: cannot write workload.cfg", dir));
  out << echo_workload_spec(s);
}

AttentionWorkload load_workload(const std::string& spec_path) {
  const WorkloadSpec s = load_workload_spec(spec_path);
  return gen_workload(s, s.seed.value_or(0));
}

}  // namespace pdsim
