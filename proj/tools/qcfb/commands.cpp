#include "qcfb/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qcfb/report.hpp"

namespace qcfb::cli {

namespace {

struct Globals {
  std::string format = "text";
  double tol = Tolerances{}.residual;
  std::uint64_t seed = 0;

  Tolerances tolerances() const {
    Tolerances t;
    t.residual = tol;
    return t;
  }
};

void add_pr_residuals(Report& r, const PrVerdict& v) {
  r.residuals.emplace_back("lyapunov", v.residuals.lyapunov);
  r.residuals.emplace_back("coupling", v.residuals.coupling);
  r.residuals.emplace_back("feedthrough", v.residuals.feedthrough);
}

void add_prongs(Report& r, const std::string& prefix, const TransferVerdict& t) {
  for (const auto* p : {&t.stability, &t.algebraic, &t.sampled}) {
    for (const auto& [name, v] : p->residuals) r.residuals.emplace_back(prefix + "." + name, v);
  }
}

std::string prong_line(const char* name, const Prong& p) {
  std::string s = fmt::format("  {}: {}", name, to_string(p.status));
  if (!p.detail.empty()) s += " (" + p.detail + ")";
  return s;
}

std::string eig_list(const Matrix& a) {
  const Vector ev = eigenvalues(a);
  std::vector<Complex> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  Matrix row(1, static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) row(0, static_cast<Index>(i)) = v[i];
  return format_matrix(row);
}

NormValue norm_value(std::string name, const NormResult& n) {
  return {std::move(name), n.value, std::string(to_string(n.method)), n.certificate};
}

// ---- check ---------------------------------------------------------------

Report cmd_check(const Globals& g, const std::string& path, bool transfer) {
  Report r;
  r.input["file"] = path;
  r.input["transfer"] = transfer;
  const Tolerances tol = g.tolerances();
  const SystemFile f = read_system_file(path);
  Matrix fm, gm, hm, km;
  if (f.kind == FileKind::system) {
    fm = f.at("F");
    gm = f.at("G");
    hm = f.at("H");
    km = f.at("K");
  } else if (f.kind == FileKind::parameters) {
    HamiltonianCoupling params = to_parameters(f);
    try {
      const QuantumSystem s = realize(params, tol);
      fm = s.f();
      gm = s.g();
      hm = s.h();
      km = s.k();
    } catch (const DomainError& e) {
      throw InputError("matrices", e.what());
    }
    r.lines.push_back("realized from (Θ, M, N)");
  } else {
    throw InputError("kind", "check expects a system or parameters file, got " + kind_name(f));
  }
  const Index mult = multiplicity(f.algebra);
  r.lines.push_back(fmt::format("system: {}, {} modes, {} fields", to_string(f.algebra),
                                fm.rows() / mult, km.rows() / mult));
  const PrVerdict v = check_pr_matrices(f.algebra, fm, gm, hm, km, tol);
  r.lines.push_back(fmt::format("realizable: {}", v.realizable() ? "true" : "false"));
  if (v.theta) r.lines.push_back("Θ = " + format_matrix(*v.theta));
  if (!v.realizable()) {
    r.lines.push_back(fmt::format("failure_reason: {}", to_string(v.failure)));
    if (!v.detail.empty()) r.lines.push_back("detail: " + v.detail);
  }
  add_pr_residuals(r, v);
  r.verdict("realizable", v.realizable(),
            v.realizable() ? "" : std::string(to_string(v.status)) + ", " + std::string(to_string(v.failure)));
  r.data["status"] = std::string(to_string(v.status));
  r.data["failure_reason"] = std::string(to_string(v.failure));
  r.data["theta"] = v.theta ? matrix_to_json(*v.theta) : Json();

  if (transfer) {
    const StateSpaceTF tf(fm, gm, hm, km);
    const bool lossless = f.algebra == SystemKind::annihilation;
    const TransferVerdict t =
        lossless ? lossless_br_check(tf, tol) : jj_unitary_check(tf, km.rows() / 2, tol);
    const char* what = lossless ? "lossless bounded real" : "(J,J)-unitary";
    r.lines.push_back(fmt::format("transfer ({}): {}", what, t.holds ? "true" : "false"));
    if (lossless) r.lines.push_back(prong_line("stability", t.stability));
    r.lines.push_back(prong_line("algebraic", t.algebraic));
    r.lines.push_back(prong_line("sampled", t.sampled));
    add_prongs(r, "transfer", t);
    r.verdict("transfer", t.holds, what);
    r.data["transfer"] = {{"holds", t.holds},
                          {"stability", std::string(to_string(t.stability.status))},
                          {"algebraic", std::string(to_string(t.algebraic.status))},
                          {"sampled", std::string(to_string(t.sampled.status))},
                          {"reduced_states", t.reduced_states}};
  }
  return r;
}

// ---- compose -------------------------------------------------------------

Report cmd_compose(const Globals& g, const std::string& plant_path,
                   const std::string& controller_path, bool h2, bool hinf, bool require_stable,
                   const std::string& emit) {
  Report r;
  r.input["plant"] = plant_path;
  r.input["controller"] = controller_path;
  r.input["h2"] = h2;
  r.input["hinf"] = hinf;
  r.input["require_stable"] = require_stable;
  const Tolerances tol = g.tolerances();
  const PlantModel p = to_plant(read_system_file(plant_path));
  const ControllerModel c = to_controller(read_system_file(controller_path));
  if (h2 && !p.cost) throw InputError("cost.C", "--h2 needs a plant cost output");
  if (hinf && !p.cost && !p.selector) throw InputError("cost", "--hinf needs a cost output or selector L");

  ClosedLoop cl;
  try {
    p.validate(tol);
    c.validate(tol);
    cl = close_loop(p, c, tol);
  } catch (const DimensionError& e) {
    r.lines.push_back(std::string("dimension mismatch: ") + e.what());
    r.verdict("compatible", false, e.what());
    return r;
  } catch (const DomainError& e) {
    throw InputError("", e.what());
  }
  r.lines.push_back(fmt::format("closed loop: {} plant modes + {} controller modes",
                                cl.plant_modes, cl.controller_modes));
  r.lines.push_back("eigenvalues: " + eig_list(cl.state_matrix));
  r.lines.push_back(fmt::format("internally stable: {}", cl.internally_stable ? "true" : "false"));
  r.data["internally_stable"] = cl.internally_stable;
  r.data["spectral_abscissa"] =
      cl.state_matrix.rows() > 0 ? Json(spectral_abscissa(cl.state_matrix)) : Json();
  if (require_stable) r.verdict("internally stable", cl.internally_stable);

  if (h2) {
    try {
      const NormResult n = lqg_cost(cl, tol);
      r.lines.push_back(fmt::format("‖Γ_cl‖₂ = {:.6f}", n.value));
      r.norms.push_back(norm_value("h2", n));
      r.verdict("h2", true);
    } catch (const Error& e) {
      r.lines.push_back(std::string("‖Γ_cl‖₂ unavailable: ") + e.what());
      r.verdict("h2", false, e.what());
    }
  }
  if (hinf) {
    try {
      if (!cl.internally_stable) throw InstabilityError("closed loop is not internally stable");
      if (p.selector) {
        const NormResult n = hinf_norm(selected_outputs(p, c, tol), 1e-9, tol);
        r.lines.push_back(fmt::format("‖Γ_Z‖∞ = {:.6f}", n.value));
        r.norms.push_back(norm_value("hinf_physical", n));
      } else {
        const NormResult n = hinf_norm(cl.system, 1e-9, tol);
        r.lines.push_back(fmt::format("‖Γ_cl‖∞ = {:.6f}", n.value));
        r.norms.push_back(norm_value("hinf", n));
      }
      r.verdict("hinf", true);
    } catch (const Error& e) {
      r.lines.push_back(std::string("H∞ norm unavailable: ") + e.what());
      r.verdict("hinf", false, e.what());
    }
  }
  if (!emit.empty()) {
    SystemFile out;
    try {
      const StateSpaceTF phys = physical_outputs(p, c, tol);
      out.kind = FileKind::system;
      out.algebra = p.kind;
      out.dimensions["modes"] = cl.plant_modes + cl.controller_modes;
      out.dimensions["fields"] = phys.inputs() / multiplicity(p.kind);
      out.matrices = {{"F", phys.a}, {"G", phys.b}, {"H", phys.c}, {"K", phys.d}};
    } catch (const NotAugmentableError&) {
      out = from_state_space(cl.system, p.kind);
    }
    out.metadata["label"] = "closed loop";
    write_system_file(emit, out);
    r.lines.push_back(fmt::format("wrote {} ({})", emit, kind_name(out)));
  }
  return r;
}

// ---- synth ---------------------------------------------------------------

Report cmd_synth(const Globals& g, const std::string& path, const std::string& kind_flag,
                 bool no_gate, const std::string& emit) {
  Report r;
  r.input["file"] = path;
  r.input["kind"] = kind_flag;
  r.input["hinf_gate"] = !no_gate;
  const Tolerances tol = g.tolerances();
  const Triple t = to_triple(read_system_file(path));
  SystemKind kind = t.algebra;
  if (!kind_flag.empty()) {
    kind = kind_flag == "general" ? SystemKind::general : SystemKind::annihilation;
    if (kind != t.algebra) throw InputError("algebra", "file algebra differs from --kind");
  }

  NoiseSynthesis s;
  if (kind == SystemKind::annihilation) {
    SynthOptions opts;
    opts.hinf_gate = !no_gate;
    try {
      s = synth_noise_annihilation(t.f_c, t.g_cy, t.h_c, opts, tol);
    } catch (const NotRealizableError& e) {
      r.lines.push_back("admissible: false");
      if (e.prong() == "hinf") {
        r.lines.push_back(fmt::format("H∞ admissibility failed: {} > 1", decimal(e.value())));
      } else {
        r.lines.push_back(e.what());
      }
      r.residuals.emplace_back(e.prong(), e.value());
      r.verdict("admissible", false, e.prong());
      return r;
    } catch (const DomainError& e) {
      throw InputError("matrices", e.what());
    }
    r.lines.push_back("admissible: true");
    if (t.f_c.rows() > 0) {
      r.lines.push_back(fmt::format("‖H_c(sI − F_c)⁻¹‖∞ = {:.6f}", s.admissibility_norm));
      r.residuals.emplace_back("admissibility_norm", s.admissibility_norm);
    }
    r.verdict("admissible", true);
  } else {
    Matrix theta;
    if (t.theta) {
      theta = *t.theta;
    } else {
      theta = random_commutation_matrix(t.f_c.rows() / 2, g.seed);
      r.lines.push_back(fmt::format("Θ drawn from seed {}", g.seed));
    }
    try {
      s = synth_noise_general(t.f_c, t.g_cy, t.h_c, theta, tol);
    } catch (const DomainError& e) {
      throw InputError("matrices.Theta", e.what());
    }
  }
  r.lines.push_back("Θ = " + format_matrix(s.theta));
  r.lines.push_back(fmt::format("extra noise channels: {}", s.extra_noise_channels));
  r.lines.push_back(fmt::format("zero extra noise: {}", s.zero_extra_noise ? "true" : "false"));
  if (!s.note.empty()) r.lines.push_back("note: " + s.note);
  add_pr_residuals(r, s.verdict);
  r.verdict("augmented controller realizable", s.verdict.realizable(), s.verdict.detail);
  r.data["extra_noise_channels"] = s.extra_noise_channels;
  r.data["zero_extra_noise"] = s.zero_extra_noise;
  r.data["theta"] = matrix_to_json(s.theta);
  if (!emit.empty()) {
    SystemFile out = from_controller(s.controller);
    out.metadata["label"] = "synthesized controller";
    write_system_file(emit, out);
    r.lines.push_back(fmt::format("wrote {}", emit));
  }
  return r;
}

// ---- verify --------------------------------------------------------------

struct Instance {
  std::string label;
  std::uint64_t seed = 0;
  PlantModel plant;
};

Report cmd_verify(const Globals& g, const std::string& theorem, const std::string& path,
                  const std::vector<long long>& random, int challengers) {
  Report r;
  r.input["theorem"] = theorem;
  const Tolerances tol = g.tolerances();
  std::vector<Instance> instances;
  const bool t5 = theorem == "T5";
  const bool t6 = theorem == "T6";
  if (!path.empty() && !random.empty()) throw InputError("", "give a plant file or --random, not both");
  if (!path.empty()) {
    r.input["file"] = path;
    PlantModel p = to_plant(read_system_file(path));
    if (p.kind != SystemKind::annihilation) {
      throw InputError("algebra", theorem + " applies to annihilation-kind plants");
    }
    if (t5 && !p.cost) throw InputError("cost.C", "T5 needs a plant cost output");
    if (t6 && !p.selector) throw InputError("cost.L", "T6 needs a selector L");
    instances.push_back({"", g.seed, std::move(p)});
  } else if (random.size() == 4) {
    const Index n = random[0];
    const Index m = random[1];
    const long long count = random[2];
    const auto seed = static_cast<std::uint64_t>(random[3]);
    if (n < 1 || m < 1 || count < 1 || random[3] < 0) {
      throw InputError("--random", "n, m and count must be positive, seed non-negative");
    }
    r.input["random"] = {{"modes", n}, {"fields", m}, {"count", count}, {"seed", seed}};
    for (long long i = 0; i < count; ++i) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
      try {
        instances.push_back({fmt::format("seed {}", s), s,
                             random_pr_plant(n, m, m, s, t5 ? 1 : 0, t6 ? m : 0)});
      } catch (const GenerationError& e) {
        r.skipped.push_back(fmt::format("generation failed [seed {}]: {}", s, e.what()));
      }
    }
  } else {
    throw InputError("", "verify needs a plant file or --random n m count seed");
  }
  r.input["challengers"] = challengers;

  int held = 0;
  int evaluated = 0;
  double max_gain = 0.0;
  double max_dev = 0.0;
  double max_gap = -std::numeric_limits<double>::infinity();
  double norm_lo = std::numeric_limits<double>::infinity();
  double norm_hi = -std::numeric_limits<double>::infinity();
  double pointwise = 0.0;
  Json details = Json::array();

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    const std::string tag = inst.label.empty() ? "" : " [" + inst.label + "]";
    const std::string name = fmt::format("instance {}", i);
    const PlantModel& p = inst.plant;
    try {
      Json entry = {{"instance", i}, {"seed", inst.seed}};
      bool holds = true;
      std::string line;
      if (theorem == "C1") {
        double gain = 0.0;
        double dev = 0.0;
        for (const StaticGain& sg : zero_gain_family(p.control_fields(), p.output_fields(), inst.seed)) {
          const TheoremReport z = verify_zero_gain(p, sg.k_cy, sg.k_cw, tol);
          if (!z.hypothesis_ok) throw NotAugmentableError(z.narrative, z.evidence);
          holds = holds && z.holds;
          gain = std::max(gain, z.evidence[0].second);
          dev = std::max(dev, z.evidence[1].second);
        }
        max_gain = std::max(max_gain, gain);
        max_dev = std::max(max_dev, dev);
        entry["gain_norm"] = gain;
        entry["covariance_deviation"] = dev;
        line = fmt::format("‖K_g‖ = {:.1e}, |Q − Θ| = {:.1e}", gain, dev);
      } else {
        TheoremReport rep;
        if (t5) {
          StaticLqgOptions opts;
          opts.challengers = challengers;
          opts.seed = inst.seed;
          rep = verify_static_lqg(p, opts, tol);
        } else {
          HinfOptions opts;
          opts.seed = inst.seed;
          rep = verify_trivial_hinf(p, random_challengers(p, challengers, inst.seed), opts, tol);
        }
        if (!rep.hypothesis_ok) {
          const bool not_pr = rep.narrative.rfind("plant not physically realizable", 0) == 0;
          r.skipped.push_back((not_pr ? std::string("plant not physically realizable") : rep.narrative) + tag);
          continue;
        }
        holds = rep.holds;
        for (const auto& [k, v] : rep.evidence) entry[k] = std::isfinite(v) ? Json(v) : Json();
        for (const std::string& s : rep.skipped) r.skipped.push_back(s + tag);
        line = rep.narrative;
        if (t5) {
          const double gap = rep.evidence[1].second - rep.evidence[2].second;
          if (std::isfinite(gap)) max_gap = std::max(max_gap, gap);
          max_gain = std::max(max_gain, rep.evidence[0].second);
        } else {
          norm_lo = std::min(norm_lo, rep.evidence[0].second);
          norm_hi = std::max(norm_hi, rep.evidence[1].second);
          pointwise = std::max(pointwise, rep.evidence[2].second);
        }
      }
      entry["holds"] = holds;
      details.push_back(std::move(entry));
      ++evaluated;
      held += holds ? 1 : 0;
      r.lines.push_back(fmt::format("{}{}: {}, {}", name, tag, holds ? "holds" : "FAILS", line));
      r.verdict(name, holds);
    } catch (const NotAugmentableError&) {
      r.skipped.push_back("plant not physically realizable" + tag);
    } catch (const GenerationError& e) {
      r.skipped.push_back(std::string(e.what()) + tag);
    } catch (const DesignError& e) {
      r.skipped.push_back(std::string(e.what()) + tag);
    }
  }

  if (theorem == "C1") {
    r.lines.push_back(fmt::format("{}/{} zero Kalman gain (max ‖K_g‖ = {:.0e})", held, evaluated, max_gain));
    r.residuals.emplace_back("max_gain_norm", max_gain);
    r.residuals.emplace_back("max_covariance_deviation", max_dev);
  } else if (t5) {
    r.lines.push_back(fmt::format("{}/{} static LQG optimal", held, evaluated));
    r.residuals.emplace_back("max_gain_norm", max_gain);
    if (std::isfinite(max_gap)) r.residuals.emplace_back("max_static_minus_dynamic", max_gap);
  } else {
    if (evaluated > 0) {
      r.lines.push_back(fmt::format("{}/{} trivial controller optimal, norms ∈ [{:.9f}, {:.9f}]",
                                    held, evaluated, norm_lo, norm_hi));
      r.residuals.emplace_back("max_norm_deviation",
                               std::max(std::abs(norm_lo - 1.0), std::abs(norm_hi - 1.0)));
      r.residuals.emplace_back("max_pointwise_deviation", pointwise);
    } else {
      r.lines.push_back("0/0 trivial controller optimal");
    }
  }
  if (evaluated == 0) r.verdict("instances", false, "every instance was skipped");
  r.data["instances"] = std::move(details);
  return r;
}

// ---- gen -----------------------------------------------------------------

Report cmd_gen(const Globals& g, Index n, Index m, const std::string& kind_flag, bool hurwitz,
               const std::string& emit) {
  Report r;
  r.input["modes"] = n;
  r.input["fields"] = m;
  r.input["kind"] = kind_flag;
  r.input["hurwitz"] = hurwitz;
  if (n < 1 || m < 1) throw InputError("", "modes and fields must be positive");
  const SystemKind kind = kind_flag == "general" ? SystemKind::general : SystemKind::annihilation;
  RandomSystemOptions opts;
  opts.hurwitz_required = hurwitz;
  RandomPrSystem gen = [&] {
    try {
      return random_pr_system(n, m, g.seed, kind, opts);
    } catch (const GenerationError& e) {
      throw InputError("", e.what());
    }
  }();
  SystemFile f = from_system(gen.system);
  f.metadata["label"] = fmt::format("random {} system", to_string(kind));
  f.metadata["seed"] = g.seed;
  const PrVerdict v = check_pr(gen.system, g.tolerances());
  r.lines.push_back(fmt::format("generated {} system: {} modes, {} fields (seed {}, attempts {})",
                                to_string(kind), n, m, g.seed, gen.attempts));
  add_pr_residuals(r, v);
  r.verdict("realizable", v.realizable());
  if (!emit.empty()) {
    write_system_file(emit, f);
    r.lines.push_back(fmt::format("wrote {}", emit));
  } else {
    r.data["system"] = to_json(f);
    if (g.format == "text") {
      std::istringstream in(dump(f));
      for (std::string l; std::getline(in, l);) r.lines.push_back(l);
    }
  }
  return r;
}

// ---- params --------------------------------------------------------------

Report cmd_params(const Globals& g, const std::string& path, const std::string& emit) {
  Report r;
  r.input["file"] = path;
  const Tolerances tol = g.tolerances();
  const SystemFile f = read_system_file(path);
  QuantumSystem s = [&] {
    try {
      return to_system(f, tol);
    } catch (const DomainError& e) {
      throw InputError("matrices", e.what());
    }
  }();
  try {
    const HamiltonianCoupling p = extract_params(s, tol);
    r.lines.push_back("realizable: true");
    r.lines.push_back("Θ = " + format_matrix(p.theta));
    r.lines.push_back("M = " + format_matrix(p.hamiltonian));
    r.lines.push_back("N = " + format_matrix(p.coupling));
    r.data["parameters"] = to_json(from_parameters(p));
    const PrVerdict v = verify_pr_certificate(s, p.theta, tol);
    add_pr_residuals(r, v);
    r.verdict("realizable", true);
    if (!emit.empty()) {
      SystemFile out = from_parameters(p);
      write_system_file(emit, out);
      r.lines.push_back(fmt::format("wrote {}", emit));
    }
  } catch (const ExtractionError& e) {
    r.lines.push_back("realizable: false");
    r.lines.push_back(fmt::format("failure_reason: {}", to_string(e.verdict().failure)));
    add_pr_residuals(r, e.verdict());
    r.verdict("realizable", false, e.what());
  }
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherent quantum feedback analysis", "qcfb"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--tol", g.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");

  std::function<Report()> action;

  std::string path, path2, emit, kind, theorem;
  bool transfer = false, h2 = false, hinf = false, require_stable = false, no_gate = false,
       hurwitz = false;
  std::vector<long long> random;
  int challengers = -1;
  Index n = 0, m = 0;

  CLI::App* check = app.add_subcommand("check", "Check physical realizability");
  check->add_option("file", path, "System file")->required();
  check->add_flag("--transfer", transfer, "Also run the transfer-function check");
  check->callback([&] { action = [&] { return cmd_check(g, path, transfer); }; });

  CLI::App* compose = app.add_subcommand("compose", "Close a plant-controller loop");
  compose->add_option("plant", path, "Plant file")->required();
  compose->add_option("controller", path2, "Controller file")->required();
  compose->add_flag("--h2", h2, "LQG (H2) cost of the closed loop");
  compose->add_flag("--hinf", hinf, "H-infinity norm of the closed loop");
  compose->add_flag("--require-stable", require_stable, "Fail unless internally stable");
  compose->add_option("-o,--emit", emit, "Write the closed loop to a file");
  compose->callback([&] {
    action = [&] { return cmd_compose(g, path, path2, h2, hinf, require_stable, emit); };
  });

  CLI::App* synth = app.add_subcommand("synth", "Synthesize controller noise");
  synth->add_option("file", path, "Controller triple file")->required();
  synth->add_option("--kind", kind, "Algebra")->check(CLI::IsMember({"annihilation", "general"}));
  synth->add_flag("--no-gate", no_gate, "Skip the H-infinity admissibility gate");
  synth->add_option("-o,--emit", emit, "Write the controller to a file");
  synth->callback([&] { action = [&] { return cmd_synth(g, path, kind, no_gate, emit); }; });

  CLI::App* verify = app.add_subcommand("verify", "Verify C1, T5 or T6");
  verify->add_option("theorem", theorem, "C1, T5 or T6")
      ->required()
      ->check(CLI::IsMember({"C1", "T5", "T6"}));
  verify->add_option("file", path, "Plant file");
  verify->add_option("--random", random, "n m count seed")->expected(4);
  verify->add_option("--challengers", challengers, "Challenger controllers per plant");
  verify->callback([&] {
    action = [&] {
      const int k = challengers >= 0 ? challengers : (theorem == "T5" ? 20 : 5);
      return cmd_verify(g, theorem, path, random, k);
    };
  });

  CLI::App* gen = app.add_subcommand("gen", "Emit a random realizable system");
  gen->add_option("modes", n, "Modes")->required();
  gen->add_option("fields", m, "Fields")->required();
  gen->add_option("--kind", kind, "Algebra")->check(CLI::IsMember({"annihilation", "general"}));
  gen->add_flag("--hurwitz", hurwitz, "Require a Hurwitz F");
  gen->add_option("-o,--emit", emit, "Write the system to a file");
  gen->callback([&] { action = [&] { return cmd_gen(g, n, m, kind, hurwitz, emit); }; });

  CLI::App* params = app.add_subcommand("params", "Extract (Θ, M, N)");
  params->add_option("file", path, "System file")->required();
  params->add_option("-o,--emit", emit, "Write the parameters to a file");
  params->callback([&] { action = [&] { return cmd_params(g, path, emit); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Report r;
  std::string command;
  for (CLI::App* sub : app.get_subcommands()) command = sub->get_name();
  try {
    r = action();
  } catch (const InputError& e) {
    r = Report{};
    r.error = e.what();
    err << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    r = Report{};
    r.error = std::string("invalid input: ") + e.what();
    err << "error: " << *r.error << '\n';
  } catch (const Error& e) {
    r.verdict("completed", false, e.what());
    err << "error: " << e.what() << '\n';
  }
  r.command = command;
  r.input["seed"] = g.seed;
  r.input["tol"] = g.tol;
  if (g.format == "json") {
    out << pretty(render_json(r)) << '\n';
  } else {
    out << render_text(r);
  }
  return r.exit_code();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace qcfb::cli
