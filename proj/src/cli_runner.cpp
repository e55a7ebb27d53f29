#include "massive/cli_runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "massive/attractor_lab.hpp"

namespace massive {

using json = nlohmann::ordered_json;

int RunConfig::fiber_d() const { return d ? *d : (preset == Preset::fast ? 1 : 2); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(int line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) fail_line(line, key + ": cannot parse '" + v + "'");
  return out;
}

template <class T>
void check_range(T v, T lo, T hi, int line, const std::string& key, const std::string& rule) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << key << " = " << v << " out of range: " << rule;
    fail_line(line, os.str());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

template <class T, class Field>
Setter number(Field field, T lo, T hi, std::string rule) {
  return [=](RunConfig& c, const std::string& v, int line) {
    const std::string key = rule.substr(0, rule.find(' '));
    const T x = parse_number<T>(v, line, key);
    check_range(x, lo, hi, line, key, rule);
    c.*field = x;
  };
}

template <class T, class Field>
Setter optional_number(Field field, T lo, T hi, std::string rule) {
  return [=](RunConfig& c, const std::string& v, int line) {
    const std::string key = rule.substr(0, rule.find(' '));
    const T x = parse_number<T>(v, line, key);
    check_range(x, lo, hi, line, key, rule);
    c.*field = x;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s{
      {"preset",
       [](RunConfig& c, const std::string& v, int line) {
         try {
           c.preset = parse_preset(v);
         } catch (const std::invalid_argument& e) {
           fail_line(line, e.what());
         }
       }},
      {"out", [](RunConfig& c, const std::string& v, int) { c.out = v; }},
      {"m", number<int>(&RunConfig::m, 3, 64, "m must be in [3, 64] (m >= 3 required)")},
      {"d", optional_number<int>(&RunConfig::d, 1, 2, "d must be 1 or 2")},
      {"lambda", number<double>(&RunConfig::lambda, 0.5000001, 0.9999999,
                                "lambda must lie in (1/2, 1)")},
      {"epsilon", number<double>(&RunConfig::epsilon, 1e-6, 1.0, "epsilon must lie in (0, 1]")},
      {"k", optional_number<int>(&RunConfig::k, 0, 64, "k must be in [0, 64] (0 = auto)")},
      {"tau", optional_number<double>(&RunConfig::tau, 0.0, 2.0, "tau must lie in [0, 2] (0 = auto)")},
      {"r_hat", optional_number<double>(&RunConfig::r_hat, 1e-6, 0.2499999, "r_hat must lie in (0, 1/4)")},
      {"r_check", optional_number<double>(&RunConfig::r_check, 0.0, 0.2499999,
                                          "r_check must lie in [0, 1/4) (0 = auto)")},
      {"shrink", optional_number<double>(&RunConfig::shrink, 0.0, 1.0,
                                         "shrink must lie in [0, 1] (0 = auto)")},
      {"cover_margin", number<double>(&RunConfig::cover_margin, 0.0, 0.5, "cover_margin must lie in [0, 0.5]")},
      {"tls_margin", number<double>(&RunConfig::tls_margin, 0.0, 0.5, "tls_margin must lie in [0, 0.5]")},
      {"root_tol", number<double>(&RunConfig::root_tol, 1e-15, 1e-3, "root_tol must lie in [1e-15, 1e-3]")},
      {"box_margin", number<double>(&RunConfig::box_margin, 0.0, 0.5, "box_margin must lie in [0, 0.5]")},
      {"seed", number<std::uint64_t>(&RunConfig::seed, 0, UINT64_MAX, "seed must be an unsigned 64-bit integer")},
      {"threads", number<int>(&RunConfig::threads, 0, 1024, "threads must be in [0, 1024]")},
      {"starts", number<long>(&RunConfig::starts, 1, 100000, "starts must be in [1, 10^5]")},
      {"steps", number<long>(&RunConfig::steps, 1, 1000000000L, "steps must be in [1, 10^9]")},
      {"burn_in", number<long>(&RunConfig::burn_in, 0, 1000000000L, "burn_in must be in [0, 10^9]")},
      {"grid_phi", number<int>(&RunConfig::grid_phi, 1, 4096, "grid_phi must be in [1, 4096]")},
      {"grid_x", number<int>(&RunConfig::grid_x, 1, 4096, "grid_x must be in [1, 4096]")},
      {"depth", number<int>(&RunConfig::depth, 1, 40, "depth must be in [1, 40]")},
      {"graph_length", number<int>(&RunConfig::graph_length, 0, 10000, "graph_length must be in [0, 10^4]")},
      {"graph_trials", number<int>(&RunConfig::graph_trials, 1, 10000000, "graph_trials must be in [1, 10^7]")},
      {"srb_starts", number<int>(&RunConfig::srb_starts, 2, 10000, "srb_starts must be in [2, 10^4]")},
      {"srb_steps", number<long>(&RunConfig::srb_steps, 10000, 1000000000L, "srb_steps must be in [10^4, 10^9]")},
      {"lyapunov_steps", number<long>(&RunConfig::lyapunov_steps, 100000, 1000000000L,
                                      "lyapunov_steps must be in [10^5, 10^9]")},
      {"eps1", number<double>(&RunConfig::eps1, 0.0, 1.0, "eps1 must lie in [0, 1]")},
      {"eps2", number<double>(&RunConfig::eps2, 0.0, 1.0, "eps2 must lie in [0, 1]")},
      {"perturb_factor", number<double>(&RunConfig::perturb_factor, 0.01, 1.0, "perturb_factor must lie in (0, 1]")},
      {"mdsc_phi", number<int>(&RunConfig::mdsc_phi, 1, 100000, "mdsc_phi must be in [1, 10^5]")},
      {"mdsc_x", number<int>(&RunConfig::mdsc_x, 0, 100000, "mdsc_x must be in [0, 10^5] (0 = auto)")},
      {"fiber_grid", number<int>(&RunConfig::fiber_grid, 2, 1000, "fiber_grid must be in [2, 1000]")},
      {"disk_radius", number<double>(&RunConfig::disk_radius, 1.0, 100.0, "disk_radius must lie in [1, 100]")},
      {"alpha", number<double>(&RunConfig::alpha, 1e-6, 1.0, "alpha must lie in (0, 1]")},
  };
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail_line(line, "malformed line, expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) fail_line(line, "malformed line, expected 'key = value'");
    const auto it = setters().find(key);
    if (it == setters().end()) fail_line(line, "unknown key '" + key + "'");
    it->second(cfg, value, line);
  }
  if (cfg.burn_in >= cfg.steps) {
    throw std::invalid_argument("config: burn_in must be smaller than steps");
  }
  return cfg;
}

FiberParams fiber_params(const RunConfig& cfg) {
  FiberParams f = preset_fiber_params(cfg.preset);
  f.d = cfg.fiber_d();
  f.lambda = cfg.lambda;
  f.epsilon = cfg.epsilon;
  f.cover_margin = cfg.cover_margin;
  if (cfg.k) f.k = *cfg.k;
  if (cfg.tau) f.tau = *cfg.tau;
  if (cfg.r_hat) f.r_hat = *cfg.r_hat;
  if (cfg.r_check) f.r_check = *cfg.r_check;
  if (cfg.shrink) f.shrink = *cfg.shrink;
  return f;
}

namespace {

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const AffineMap& a) { return {{"linear", to_json(a.linear)}, {"translation", to_json(a.translation)}}; }

json to_json(const CoverCertificate& c) {
  json j{{"covered", c.covered}, {"depth", c.max_depth_used}, {"margin", c.margin},
         {"cells", c.cells_examined}};
  if (c.witness_cell) {
    j["witness_cell"] = {{"lower", to_json(c.witness_cell->lower)},
                         {"upper", to_json(c.witness_cell->upper)}};
  }
  return j;
}

json config_echo(const RunConfig& c) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  return {{"preset", preset_name(c.preset)}, {"m", c.m}, {"d", c.fiber_d()},
          {"lambda", c.lambda}, {"epsilon", c.epsilon}, {"k", opt(c.k)},
          {"tau", opt(c.tau)}, {"r_hat", opt(c.r_hat)}, {"r_check", opt(c.r_check)},
          {"shrink", opt(c.shrink)}, {"cover_margin", c.cover_margin},
          {"tls_margin", c.tls_margin}, {"root_tol", c.root_tol},
          {"box_margin", c.box_margin}, {"seed", c.seed}, {"threads", c.threads},
          {"starts", c.starts}, {"steps", c.steps}, {"burn_in", c.burn_in},
          {"grid_phi", c.grid_phi}, {"grid_x", c.grid_x}, {"depth", c.depth},
          {"graph_length", c.graph_length}, {"graph_trials", c.graph_trials},
          {"srb_starts", c.srb_starts}, {"srb_steps", c.srb_steps},
          {"lyapunov_steps", c.lyapunov_steps}, {"eps1", c.eps1}, {"eps2", c.eps2},
          {"perturb_factor", c.perturb_factor}, {"mdsc_phi", c.mdsc_phi},
          {"mdsc_x", c.mdsc_x}, {"fiber_grid", c.fiber_grid},
          {"disk_radius", c.disk_radius}, {"alpha", c.alpha}};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {}

  json report;

  void check(const std::string& name, bool passed, json detail = json::object(),
             bool waived = false) {
    detail["name"] = name;
    detail["passed"] = passed;
    if (waived) detail["waived"] = true;
    checks_.push_back(detail);
    if (!passed && !waived) failures_.push_back(name);
    log_ << (passed ? "  ok    " : waived ? "  waive " : "  FAIL  ") << name << '\n';
  }

  bool all_passed() const { return failures_.empty(); }

  void finish() {
    report["checks"] = checks_;
    report["failures"] = failures_;
    report["all_passed"] = all_passed();
  }

  // Builds the fiber arc once; false (with a failed check) when it throws.
  bool ensure_arc() {
    if (arc_) return true;
    if (arc_failed_) return false;
    try {
      arc_ = build_fiber_arc(fiber_params(cfg_));
      skew_ = SkewSystem{make_arc_pair(cfg_.m), *arc_};
      return true;
    } catch (const std::domain_error& e) {
      arc_failed_ = true;
      const std::string msg = e.what();
      const bool final_cover = msg.find("final covering") != std::string::npos;
      check(final_cover ? "final_cover" : "fiber_arc", false, {{"error", msg}});
      return false;
    }
  }

  void construct() {
    log_ << "construct\n";
    const int d = cfg_.fiber_d();
    json sec;
    BoxSpec spec;
    try {
      spec = build_box_spec(d, cfg_.lambda, cfg_.box_margin);
    } catch (const std::domain_error& e) {
      check("box_spec", false, {{"error", e.what()}});
      report["construct"] = sec;
      return;
    }
    sec["box_spec"] = {{"n", spec.n}, {"lambda", spec.lambda}, {"radii", to_json(spec.radii)},
                       {"shift", spec.shift}, {"margin", box_spec_margin(spec)}};
    check("box_spec", box_spec_margin(spec) >= cfg_.box_margin,
          {{"margin", box_spec_margin(spec)}});
    const AffineMap g0 = build_G(spec, 0.0);
    const AffineMap g1 = build_G(spec, 1.0);
    sec["G0"] = to_json(g0);
    sec["G1"] = to_json(g1);
    const Parallelotope b = Parallelotope::box(Vec::Zero(d), spec.radii);
    const CoverCertificate tls =
        certify_covered(b, RegionUnion({b.mapped(g0), b.mapped(g1)}), cfg_.tls_margin, 24);
    sec["tls_cover"] = to_json(tls);
    check("tls_cover", tls.covered, to_json(tls));

    if (!ensure_arc()) {
      report["construct"] = sec;
      return;
    }
    const FiberArc& arc = *arc_;
    double residual = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const AffineMap g = build_G(spec, i / 10.0);
      residual = std::max(residual, affine_distance(power(affine_kth_root(g, arc.k), arc.k), g));
    }
    sec["k"] = arc.k;
    sec["root_residual"] = residual;
    check("root_identity", residual <= cfg_.root_tol, {{"residual", residual}, {"k", arc.k}});
    sec["E0"] = to_json(arc.e_box(0.0));
    sec["E1"] = to_json(arc.e_box(1.0));

    bool steps_ok = true;
    for (const auto& s : arc.region.steps) steps_ok = steps_ok && s.certificate.covered;
    sec["region_A"] = {{"pieces", arc.region.region.size()},
                       {"shrink", arc.region.shrink},
                       {"diameter", diameter(arc.region.region)},
                       {"final_cover", to_json(arc.region.final_cover)}};
    check("region_steps", steps_ok, {{"steps", arc.region.steps.size()}});
    check("final_cover", arc.region.final_cover.covered, to_json(arc.region.final_cover));
    const RegionUnion& a = arc.region.region;
    const CoverCertificate ac = certify_region_covered(
        a, a.mapped(arc.e_box(0.0)).merged(a.mapped(arc.e_box(1.0))), cfg_.cover_margin, 24);
    sec["region_cover"] = to_json(ac);
    check("region_cover", ac.covered, to_json(ac));
    sec["fiber"] = {{"d", arc.d}, {"tau", arc.tau}, {"r_hat", arc.r_hat},
                    {"r_check", arc.r_check}, {"r_field", arc.r_field}, {"scale", arc.scale},
                    {"E0_chart", to_json(arc.e_at(0.0))}, {"E1_chart", to_json(arc.e_at(1.0))}};
    report["construct"] = sec;
  }

  void certify() {
    log_ << "certify\n";
    if (!ensure_arc()) return;
    const FiberReport fr = verify_fiber_arc(*arc_, cfg_.epsilon, cfg_.fiber_grid);
    json sec{{"trapping", fr.trapping},          {"trapping_margin", fr.trapping_margin},
             {"contraction", fr.contraction},    {"max_norm", fr.max_norm},
             {"max_norm_inner", fr.max_norm_inner},
             {"c1_closeness", fr.c1_closeness},  {"c1_distance", fr.c1_distance},
             {"covering", fr.covering},          {"cover", to_json(fr.cover)},
             {"diffeo", fr.diffeo},              {"min_det", fr.min_det},
             {"samples", fr.samples},            {"epsilon", cfg_.epsilon}};
    check("fiber_trapping", fr.trapping, {{"margin", fr.trapping_margin}});
    check("fiber_contraction", fr.contraction, {{"max_norm", fr.max_norm}});
    // The fast preset trades epsilon-closeness for strong contraction.
    check("fiber_c1_closeness", fr.c1_closeness, {{"distance", fr.c1_distance}},
          cfg_.preset == Preset::fast);
    check("fiber_covering", fr.covering, to_json(fr.cover));
    check("fiber_diffeo", fr.diffeo, {{"min_det", fr.min_det}});

    const int nx = cfg_.mdsc_x > 0 ? cfg_.mdsc_x : (arc_->d == 1 ? 10000 : 100);
    const MdscReport md = mdsc_check(*skew_, cfg_.mdsc_phi, nx);
    sec["mdsc"] = {{"L", md.L}, {"margin", md.margin}, {"forward_phi", md.forward_phi},
                   {"forward_x", md.forward_x}, {"inverse_phi", md.inverse_phi},
                   {"inverse_x", md.inverse_x}, {"samples", md.samples}};
    check("mdsc", md.pass, {{"L", md.L}, {"m", cfg_.m}});
    report["certify"] = sec;
  }

  OccupancyParams occupancy_params() const {
    OccupancyParams p;
    p.n_starts = cfg_.starts;
    p.steps = cfg_.steps;
    p.burn_in = cfg_.burn_in;
    p.dims = {cfg_.grid_phi};
    for (int i = 0; i < cfg_.fiber_d(); ++i) p.dims.push_back(cfg_.grid_x);
    p.seed = cfg_.seed;
    return p;
  }

  void simulate() {
    log_ << "simulate\n";
    if (!ensure_arc()) return;
    const DynamicalSystem sys = *skew_;
    const TrappingReport tr = trapping_check(sys, 256, 64);
    check("trapping", tr.pass, {{"margin", tr.margin}});
    const OccupancyGrid grid = occupancy_run(sys, occupancy_params());
    std::ofstream os(std::filesystem::path(cfg_.out) / "occupancy.ogrid");
    grid.write(os);
    const InteriorReport ir = interior_occupancy(grid, arc_->region_chart());
    json sec{{"trapping_margin", tr.margin},     {"interior_cells", ir.interior_cells},
             {"empty_cells", ir.empty_cells},    {"min_count", ir.min_count},
             {"outside", grid.outside},          {"total_steps", grid.total_steps}};
    check("interior_occupancy", ir.pass, sec);
    report["simulate"] = sec;
  }

  void density() {
    log_ << "density\n";
    if (!ensure_arc()) return;
    std::ofstream csv(std::filesystem::path(cfg_.out) / "density.csv");
    csv << "phi,word";
    for (int i = 0; i < arc_->d; ++i) csv << ",x" << i + 1;
    csv << '\n';
    csv.precision(17);
    json sec = json::array();
    const int half = std::max(1, cfg_.depth / 2);
    for (double phi : {0.0, 0.37, 0.71}) {
      const DensityReport full = density_certificate(*skew_, phi, cfg_.depth, Vec::Zero(arc_->d),
                                                     256, cfg_.seed);
      const DensityReport coarse =
          density_certificate(*skew_, phi, half, Vec::Zero(arc_->d), 256, cfg_.seed);
      const bool monotone = full.covering_radius <= coarse.covering_radius;
      for (std::size_t w = 0; w < full.points.size(); ++w) {
        csv << phi << ',' << w;
        for (int i = 0; i < arc_->d; ++i) csv << ',' << full.points[w](i);
        csv << '\n';
      }
      json entry{{"phi", phi},
                 {"depth", full.depth},
                 {"covering_radius", full.covering_radius},
                 {"bound", full.bound},
                 {"lambda_eff", full.lambda_eff},
                 {"diam_A", full.diam_a},
                 {"coarse_depth", half},
                 {"coarse_covering_radius", coarse.covering_radius},
                 {"monotone", monotone},
                 {"monte_carlo", full.monte_carlo}};
      check("density_phi_" + std::to_string(phi).substr(0, 4), full.pass && monotone, entry);
      sec.push_back(entry);
    }
    report["density"] = sec;
  }

  void lyapunov() {
    log_ << "lyapunov\n";
    if (!ensure_arc()) return;
    const DynamicalSystem sys = *skew_;
    auto rng = make_rng(cfg_.seed, 7);
    const LyapunovReport ly = lyapunov_spectrum(sys, random_state(sys, rng), cfg_.lyapunov_steps);
    std::ofstream csv(std::filesystem::path(cfg_.out) / "lyapunov.csv");
    csv << "index,slot,exponent\n";
    csv.precision(17);
    for (std::size_t i = 0; i < ly.spectrum.size(); ++i) {
      const bool base = i + 1 == ly.spectrum.size();
      csv << i << ',' << (base ? "base" : "fiber" + std::to_string(i + 1)) << ','
          << ly.spectrum[i] << '\n';
    }
    const double base_err = std::abs(ly.base - std::log(static_cast<double>(cfg_.m)));
    const double fiber_cap = std::log(inner_contraction(*arc_)) + 0.02;
    double fiber_max = -std::numeric_limits<double>::infinity();
    for (double e : ly.fiber) fiber_max = std::max(fiber_max, e);
    json sec{{"spectrum", ly.spectrum}, {"base", ly.base}, {"base_error", base_err},
             {"fiber_max", fiber_max},  {"fiber_cap", fiber_cap},
             {"mean_log_det", ly.mean_log_det}};
    check("lyapunov_base", base_err <= 1e-6, {{"error", base_err}});
    check("lyapunov_fiber", fiber_max <= fiber_cap && fiber_max < 0.0,
          {{"max", fiber_max}, {"cap", fiber_cap}});
    report["lyapunov"] = sec;
  }

  void srb() {
    log_ << "srb\n";
    if (!ensure_arc()) return;
    const SrbReport sr =
        srb_consistency(*skew_, cfg_.srb_starts, cfg_.srb_steps, cfg_.burn_in, cfg_.seed + 1);
    json sec{{"averages", sr.averages},
             {"max_deviation", sr.max_deviation},
             {"max_abs_cos", sr.max_abs_cos}};
    check("srb_consistency", sr.pass, {{"max_deviation", sr.max_deviation},
                                       {"max_abs_cos", sr.max_abs_cos}});
    report["srb"] = sec;
  }

  void graph() {
    log_ << "graph\n";
    if (!ensure_arc()) return;
    try {
      const DynamicalSystem sol = make_solenoid(*skew_, cfg_.disk_radius, cfg_.alpha);
      const GraphReport g =
          graph_contraction_test(sol, cfg_.graph_length, cfg_.graph_trials, cfg_.seed + 2);
      json sec{{"max_ratio", g.max_ratio}, {"bound", g.bound}, {"trials", cfg_.graph_trials},
               {"length", cfg_.graph_length}};
      check("graph_contraction", g.pass, sec);
      report["graph"] = sec;
    } catch (const std::domain_error& e) {
      check("solenoid", false, {{"error", e.what()}});
    }
  }

  void perturb() {
    log_ << "perturb\n";
    if (!ensure_arc()) return;
    const EndoSystem endo{*skew_, cfg_.eps1, cfg_.eps2};
    const DynamicalSystem sys = endo;
    const DegreeReport deg = covering_degree_check(endo, 256, 64);
    check("covering_degree", deg.pass,
          {{"min_derivative", deg.min_derivative}, {"bound", deg.bound}});
    const TrappingReport tr = trapping_check(sys, 256, 64);
    check("perturbed_trapping", tr.pass, {{"margin", tr.margin}});
    const OccupancyGrid grid = occupancy_run(sys, occupancy_params());
    const RegionUnion a =
        scaled_about(arc_->region_chart(), Vec::Zero(arc_->d), cfg_.perturb_factor);
    const InteriorReport ir = interior_occupancy(grid, a);
    json sec{{"eps1", cfg_.eps1},
             {"eps2", cfg_.eps2},
             {"degree_min_derivative", deg.min_derivative},
             {"trapping_margin", tr.margin},
             {"region_factor", cfg_.perturb_factor},
             {"interior_cells", ir.interior_cells},
             {"empty_cells", ir.empty_cells},
             {"outside", grid.outside}};
    check("perturbed_interior_occupancy", ir.pass, sec);
    report["perturb"] = sec;
  }

  void verdict() {
    auto passed = [&](const std::string& name) {
      for (const auto& c : checks_) {
        if (c["name"] == name) return c["passed"].get<bool>();
      }
      return false;
    };
    bool density_ok = true;
    for (const auto& c : checks_) {
      if (c["name"].get<std::string>().rfind("density_", 0) == 0) {
        density_ok = density_ok && c["passed"].get<bool>();
      }
    }
    const bool massive = passed("trapping") && passed("interior_occupancy") &&
                         passed("srb_consistency") && density_ok && passed("graph_contraction");
    report["massive"] = massive;
    check("massive", massive);
  }

 private:
  const RunConfig& cfg_;
  std::ostream& log_;
  std::optional<FiberArc> arc_;
  std::optional<SkewSystem> skew_;
  bool arc_failed_ = false;
  json checks_ = json::array();
  std::vector<std::string> failures_;
};

}  // namespace

int run(const std::string& command, const RunConfig& cfg, std::ostream& log,
        std::optional<std::string> timestamp) {
  bool known = false;
  for (const auto& c : commands()) known = known || c == command;
  if (!known) throw std::invalid_argument("unknown command '" + command + "'");
  set_worker_count(cfg.threads);
  std::filesystem::create_directories(cfg.out);

  Runner r(cfg, log);
  r.report["command"] = command;
  r.report["timestamp"] = timestamp ? *timestamp : utc_now();
  r.report["versions"] = {{"massive", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  r.report["config"] = config_echo(cfg);

  const bool all = command == "all";
  if (all || command == "construct" || command == "certify") r.construct();
  if (all || command == "certify") r.certify();
  if (all || command == "simulate") r.simulate();
  if (all || command == "density") r.density();
  if (all || command == "lyapunov") r.lyapunov();
  if (all || command == "srb") r.srb();
  if (all) r.graph();
  if (all || command == "perturb") r.perturb();
  if (all) r.verdict();
  r.finish();

  std::ofstream os(std::filesystem::path(cfg.out) / "report.json");
  os << r.report.dump(2) << '\n';
  log << (r.all_passed() ? "all checks passed\n" : "some checks failed\n");
  return r.all_passed() ? 0 : 1;
}

}  // namespace massive
