// Copyright 2026 The qsdc-hsps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: distributions, capacity sweeps, intensity
// optimization, maximal distance and the Monte Carlo cross-check.
//
// Precedence: built-in defaults < --config file < command-line flags.
// Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 I/O failure.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qsdc/qsdc.hpp"

namespace {

using namespace qsdc;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string dump_config_path;
  std::optional<std::string> mode;
  std::optional<std::string> protocol;
  std::optional<double> mu;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  bool one_way = false;
  unsigned threads = 0;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig effective_config(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.mode) c.mode = parse_mode(*o.mode, "--mode");
  if (o.protocol) c.protocol = parse_protocol(*o.protocol, "--protocol");
  if (o.mu) {
    c.source.mu = *o.mu;
    c.sweep.mu = {*o.mu};
  }
  if (o.one_way) c.one_way = true;
  if (o.seed || o.shots) {
    if (!c.mc) c.mc = McRunConfig{};
    if (o.seed) c.mc->seed = *o.seed;
    if (o.shots) c.mc->shots = *o.shots;
  }
  c.validate();
  if (!o.dump_config_path.empty()) save_config(c, o.dump_config_path);
  return c;
}

void emit(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + o.out_path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + o.out_path + "' failed");
}

/// Evaluates fn(i) for i in [0, n) on worker threads and returns the rows in
/// index order. The first exception by index is rethrown.
template <class Fn>
std::vector<std::string> parallel_rows(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<std::string> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string axis_column(const RunConfig& c) { return c.one_way ? "alpha_ba_db" : "alpha_bab_db"; }

int cmd_dist(const Options& o) {
  const RunConfig c = effective_config(o);
  const double mu = c.source.mu;
  std::ostringstream os;
  os << "n,q_x2_norm,q_x3_norm,q_x4_norm,poisson\n";
  if (mu == 0.0) {
    std::cerr << "note: mu = 0, heralded events carry no photons; only the n = 0 row is emitted\n";
    os << 0;
    for (HeraldEvent ev : kUsableEvents) {
      const double p = event_probability(c.source, ev);
      if (p <= 0.0) std::cerr << "note: event " << to_string(ev) << " has zero probability\n";
      os << ',' << (p > 0.0 ? "1" : "nan");
    }
    os << ",1\n";
    emit(o, os.str());
    return kExitOk;
  }
  std::vector<std::vector<double>> cols;
  for (HeraldEvent ev : kUsableEvents) {
    const PhotonDist d = heralded_dist(c.source, ev, c.n_max);
    if (d.event_prob <= 0.0) {
      std::cerr << "note: event " << to_string(ev) << " has zero probability\n";
      cols.emplace_back(c.n_max + 1, std::numeric_limits<double>::quiet_NaN());
    } else {
      cols.push_back(d.normalized());
    }
  }
  const PhotonDist pd = poisson_dist(mu, c.n_max);
  for (std::size_t n = 0; n <= c.n_max; ++n) {
    os << n;
    for (const auto& col : cols) os << ',' << num(n < col.size() ? col[n] : 0.0);
    os << ',' << num(pd.weight(n)) << '\n';
  }
  emit(o, os.str());
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const RunConfig c = effective_config(o);
  const CapacityModel model = c.model();
  const auto grid = c.sweep.alpha_grid();
  const auto& mus = c.sweep.mu;
  auto rows = parallel_rows(grid.size() * mus.size(), o.threads, [&](std::size_t i) {
    const double a = grid[i / mus.size()];
    const double mu = mus[i % mus.size()];
    const CapacityPoint p = model.point(mu, a);
    const auto& x2 = p.classes[0];
    const auto& x3 = p.classes[1];
    std::string r = num(a) + ',' + num(distance_km(a, c.axis())) + ',' + num(mu) + ',' + std::string(to_string(p.mode)) +
                    ',' + std::string(to_string(p.protocol));
    for (double v : {p.cs, p.cs_x2, p.cs_x3, x2.iab, x3.iab, x2.iae, x3.iae, p.bounds.Y1_l, p.bounds.Y2_l,
                     p.bounds.e1_u, p.bounds.e2_u, x2.q_bab, x2.e_bab, x3.q_bab, x3.e_bab})
      r += ',' + num(v);
    return r + '\n';
  });
  std::string out = axis_column(c) +
                    ",distance_km,mu,mode,protocol,cs,cs_x2,cs_x3,iab_x2,iab_x3,iae_x2,iae_x3,"
                    "y1_l,y2_l,e1_u,e2_u,q_bab_x2,e_bab_x2,q_bab_x3,e_bab_x3\n";
  for (const auto& r : rows) out += r;
  emit(o, out);
  return kExitOk;
}

int cmd_optimize(const Options& o) {
  const RunConfig c = effective_config(o);
  const CapacityModel model = c.model();
  const auto grid = c.sweep.alpha_grid();
  auto rows = parallel_rows(grid.size(), o.threads, [&](std::size_t i) {
    const double a = grid[i];
    std::string r = num(a) + ',' + num(distance_km(a, c.axis())) + ',' + std::string(to_string(c.protocol)) + ',' +
                    std::string(to_string(c.mode)) + ',';
    try {
      const OptResult res = optimal_mu(a, model, c.optimize);
      r += num(res.mu_star) + ',' + num(res.cs_star) + ',' + std::to_string(res.evaluations) + ',' +
           num(res.bracket[0]) + ',' + num(res.bracket[1]) + ",ok";
    } catch (const NoPositiveCapacityError&) {
      r += "nan,0,0,nan,nan,no_positive_capacity";
    }
    return r + '\n';
  });
  std::string out =
      axis_column(c) + ",distance_km,protocol,mode,mu_star,cs_star,evaluations,bracket_lo,bracket_hi,status\n";
  for (const auto& r : rows) out += r;
  emit(o, out);
  return kExitOk;
}

int cmd_maxdist(const Options& o) {
  const RunConfig c = effective_config(o);
  const CapacityModel model = c.model();
  const auto& mus = c.sweep.mu;
  auto rows = parallel_rows(mus.size(), o.threads, [&](std::size_t i) {
    std::string r = num(mus[i]) + ',' + std::string(to_string(c.protocol)) + ',' + std::string(to_string(c.mode)) + ',';
    try {
      const RootResult res = max_distance(mus[i], model, c.maxdist);
      r += num(res.alpha_star_db) + ',' + num(res.distance_km) + ',' + std::to_string(res.iterations) + ",ok";
    } catch (const ProtocolDeadError&) {
      r += "nan,nan,0,protocol_dead";
    }
    return r + '\n';
  });
  std::string out = "mu,protocol,mode," + std::string(c.one_way ? "alpha_ba_star_db" : "alpha_bab_star_db") +
                    ",distance_km,iterations,status\n";
  for (const auto& r : rows) out += r;
  emit(o, out);
  return kExitOk;
}

int cmd_mc(const Options& o) {
  const RunConfig c = effective_config(o);
  const McConfig cfg = c.mc_config();
  const auto rows = estimate_vs_model(cfg, o.threads);
  std::ostringstream os;
  os << "# rng=" << kMcRngName << " seed=" << cfg.seed << " shots=" << cfg.shots << " partitions=" << cfg.partitions
     << " leg=" << to_string(cfg.leg) << " alpha_bab_db=" << num(cfg.lp.alpha_db(Leg::BAB)) << '\n';
  os << "quantity,model,mc,sigma,z\n";
  std::size_t flagged = 0;
  for (const auto& r : rows) {
    os << r.quantity << ',' << num(r.model) << ',' << num(r.mc) << ',' << num(r.sigma) << ',' << num(r.z) << '\n';
    if (r.flagged) {
      ++flagged;
      std::cerr << "flagged: " << r.quantity << " |z| = " << std::abs(r.z) << " > " << kZLimit << '\n';
    }
  }
  emit(o, os.str());
  if (flagged) std::cerr << flagged << " quantities disagree beyond " << kZLimit << " sigma\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy capacity engine for heralded-source decoy-state QSDC"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON configuration file");
  app.add_option("--out", o.out_path, "output file (default: stdout)");
  app.add_option("--dump-config", o.dump_config_path, "write the effective configuration to this file");
  app.add_option("--mode", o.mode, "decoy estimation: finite|infinite");
  app.add_option("--protocol", o.protocol, "hsps|dl04");
  app.add_option("--mu", o.mu, "intensity; replaces source.mu and the sweep intensity list");
  app.add_option("--seed", o.seed, "Monte Carlo seed");
  app.add_option("--shots", o.shots, "Monte Carlo shot count");
  app.add_flag("--one-way", o.one_way, "treat attenuation values as the one-way loss");
  app.add_option("--threads", o.threads, "worker threads (0: all cores)");

  int rc = kExitOk;
  auto bind = [&](CLI::App* sub, int (*fn)(const Options&)) { sub->callback([&, fn] { rc = fn(o); }); };
  bind(app.add_subcommand("dist", "normalized photon-number distributions"), cmd_dist);
  bind(app.add_subcommand("sweep", "capacity over the attenuation and intensity grid"), cmd_sweep);
  bind(app.add_subcommand("optimize", "optimal intensity at each attenuation of the grid"), cmd_optimize);
  bind(app.add_subcommand("maxdist", "maximal attenuation with positive capacity per intensity"), cmd_maxdist);
  bind(app.add_subcommand("mc", "Monte Carlo estimates against the closed-form model"), cmd_mc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
  return rc;
}
