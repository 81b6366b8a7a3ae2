#include "skagree/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "skagree/channel.hpp"
#include "skagree/io.hpp"
#include "skagree/parallel.hpp"
#include "skagree/region_fb.hpp"
#include "skagree/region_nofb.hpp"
#include "skagree/sim_fb.hpp"
#include "skagree/sim_nofb.hpp"

namespace skagree {

namespace {

struct Options {
  std::string channel, scheme, out, csv, mode = "nofb";
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  // search
  std::size_t restarts = 64, iterations = 500;
  double step_decay = 0.95, initial_step = 1.0;
  std::vector<double> weights{1.0, 1.0, 1.0};
  std::vector<std::size_t> cards;
  // fm
  double step = 0.01, tol = 1e-6;
  bool literal = false;
  // simulation
  std::vector<double> rates;
  std::size_t n = 8, trials = 1000, enum_cap = 1'000'000;
  double eps = 0.2;
  bool no_leakage = false;
};

SearchBudget budget_of(const Options& o) {
  SearchBudget b;
  b.restarts = o.restarts;
  b.iterations = o.iterations;
  b.step_decay = o.step_decay;
  b.initial_step = o.initial_step;
  b.seed = o.seed;
  b.workers = o.workers;
  return b;
}

Json search_config(const Options& o) {
  return Json{{"restarts", o.restarts}, {"iterations", o.iterations}, {"step_decay", o.step_decay},
              {"initial_step", o.initial_step}};
}

void print_table(const Json& j, std::ostream& out, const std::string& prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const Json& v = it.value();
    if (v.is_object()) {
      if (it.key() == "best_scheme") continue;
      print_table(v, out, key);
    } else if (v.is_array()) {
      if (v.size() > 8 || (!v.empty() && v.front().is_structured())) {
        out << std::left << std::setw(40) << key << "[" << v.size() << " entries]\n";
        continue;
      }
      out << std::left << std::setw(40) << key << v.dump() << "\n";
    } else {
      out << std::left << std::setw(40) << key << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
  }
}

void emit(const std::string& command, const Json& config, std::uint64_t seed, const Json& result, const Options& o,
          std::ostream& out) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["config"] = config;
  doc["config_hash"] = config_hash(config.dump());
  doc["seed"] = seed;
  doc["result"] = result;

  out << command << "  (config " << doc["config_hash"].get<std::string>() << ", seed " << seed << ")\n";
  print_table(result, out);

  std::string path = o.out;
  if (path.empty()) {
    if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) {
      std::string file = command;
      for (auto& ch : file) ch = ch == ' ' ? '-' : ch;
      path = (std::filesystem::path(dir) / (file + ".json")).string();
    }
  }
  const std::string text = to_file_text(doc);
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
  out << "wrote " << path << "\n";
}

struct Loaded {
  BroadcastChannelSpec channel;
  Json channel_json;
};

Loaded load_channel(const Options& o) {
  auto ch = parse_channel(o.channel);
  Json cj = channel_to_json(ch);
  return {std::move(ch), std::move(cj)};
}

Json load_scheme_json(const Options& o) { return parse_json_text(read_file(o.scheme), o.scheme); }

void run_inner_nofb(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  Json config{{"channel", cj}};
  Json result;
  if (!o.scheme.empty()) {
    const AuxScheme s = aux_scheme_from_json(load_scheme_json(o), ch.cards());
    config["scheme"] = scheme_to_json(s);
    const InnerPointNofb p = eval_inner_nofb(build_joint_nofb(ch, s));
    const OuterBox b = eval_outer_nofb(build_joint_input(ch, induced_input(ch, s)));
    result["point"] = to_json(p);
    result["outer_at_input"] = to_json(b);
    result["contained"] = check_containment(p, b);
    emit("region inner-nofb", config, 0, result, o, out);
    return;
  }
  if (o.weights.size() != 3) throw ValidationError("--weights needs three values");
  AuxCards cards = default_aux_cards(ch.cards());
  if (!o.cards.empty()) {
    if (o.cards.size() != 3) throw ValidationError("--cards needs three values");
    cards = {o.cards[0], o.cards[1], o.cards[2]};
  }
  config["weights"] = o.weights;
  config["cards"] = {cards.u0, cards.u1, cards.u2};
  config["search"] = search_config(o);
  const auto rep = maximize_inner_nofb(ch, cards, {o.weights[0], o.weights[1], o.weights[2]}, budget_of(o));
  emit("region inner-nofb", config, o.seed, to_json(rep), o, out);
}

void run_outer_nofb(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  Json config{{"channel", cj}};
  if (!o.scheme.empty()) {
    const AuxScheme s = aux_scheme_from_json(load_scheme_json(o), ch.cards());
    config["scheme"] = scheme_to_json(s);
    const OuterBox b = eval_outer_nofb(build_joint_input(ch, induced_input(ch, s)), ch);
    emit("region outer-nofb", config, 0, Json{{"box", to_json(b)}}, o, out);
    return;
  }
  config["search"] = search_config(o);
  const OuterBox b = maximize_outer_nofb(ch, budget_of(o));
  emit("region outer-nofb", config, o.seed, Json{{"box", to_json(b)}}, o, out);
}

FeedbackScheme require_fb_scheme(const Options& o, const BroadcastChannelSpec& ch) {
  if (o.scheme.empty()) throw ValidationError("--scheme is required");
  return fb_scheme_from_json(load_scheme_json(o), ch.cards());
}

void run_inner_fb(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  const FeedbackScheme s = require_fb_scheme(o, ch);
  Json config{{"channel", cj}, {"scheme", scheme_to_json(s)}};
  emit("region inner-fb", config, 0, to_json(eval_inner_fb(build_joint_fb(ch, s))), o, out);
}

void run_fm_verify(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  const FeedbackScheme s = require_fb_scheme(o, ch);
  const auto reading = o.literal ? CrossSecrecyReading::literal : CrossSecrecyReading::symmetric;
  Json config{{"channel", cj}, {"scheme", scheme_to_json(s)}, {"step", o.step}, {"tolerance", o.tol},
              {"reading", to_string(reading)}};
  const auto rep = verify_fm_matches_closed_form(build_joint_fb(ch, s), o.step, o.tol, reading, o.workers);
  emit("region fm-verify", config, 0, to_json(rep), o, out);
}

TypicalityParams tp_of(const Options& o) {
  TypicalityParams tp{o.n, o.eps};
  try {
    tp.check();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return tp;
}

SimOptions sim_of(const Options& o) {
  SimOptions s;
  s.trials = o.trials;
  s.seed = o.seed;
  s.workers = o.workers;
  s.measure_leakage = !o.no_leakage;
  s.enumeration_cap = o.enum_cap;
  return s;
}

Json sim_config(const Options& o) {
  return Json{{"n", o.n},         {"eps", o.eps},         {"trials", o.trials},
              {"rates", o.rates}, {"leakage", !o.no_leakage}, {"enumeration_cap", o.enum_cap}};
}

void write_csv(const Options& o, const SimulationReport& r) {
  if (o.csv.empty()) return;
  std::ofstream f(o.csv, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + o.csv + "'");
  f << report_to_csv(r);
}

void run_sim_nofb(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  if (o.scheme.empty()) throw ValidationError("--scheme is required");
  const AuxScheme s = aux_scheme_from_json(load_scheme_json(o), ch.cards());
  if (o.rates.size() != 6) throw ValidationError("--rates needs six values: Rt0,Rt1,Rt2,R0,R1,R2");
  NofbRates r{o.rates[0], o.rates[1], o.rates[2], o.rates[3], o.rates[4], o.rates[5]};
  Json config = sim_config(o);
  config["channel"] = cj;
  config["scheme"] = scheme_to_json(s);
  const auto rep = run_nofb(ch, s, r, tp_of(o), sim_of(o));
  write_csv(o, rep);
  emit("simulate nofb", config, o.seed, to_json(rep), o, out);
}

void run_sim_fb(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  const FeedbackScheme s = require_fb_scheme(o, ch);
  if (o.rates.size() != 4) throw ValidationError("--rates needs four values: Rp1,Rp2,R1,R2");
  FbRates r{o.rates[0], o.rates[1], o.rates[2], o.rates[3]};
  Json config = sim_config(o);
  config["channel"] = cj;
  config["scheme"] = scheme_to_json(s);
  const auto rep = run_fb(ch, s, r, tp_of(o), sim_of(o));
  write_csv(o, rep);
  emit("simulate fb", config, o.seed, to_json(rep), o, out);
}

void run_reduce(const Options& o, std::ostream& out) {
  auto [ch, cj] = load_channel(o);
  const WiretapMode mode = parse_wiretap_mode(o.mode);
  Json config{{"channel", cj}, {"mode", to_string(mode)}};
  emit("reduce wiretap", config, 0, channel_to_json(reduce_to_wiretap(ch, mode)), o, out);
}

}  // namespace

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Secret-key rate regions and binning simulators for state-dependent broadcast channels", "skagree"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* c) {
    c->add_option("--channel", o.channel, "channel JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "write the JSON result here");
    c->add_option("--workers", o.workers, "worker threads (results do not depend on it)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  };
  auto add_search = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "master seed");
    c->add_option("--restarts", o.restarts, "random restarts")->check(CLI::PositiveNumber);
    c->add_option("--iterations", o.iterations, "iterations per restart")->check(CLI::PositiveNumber);
    c->add_option("--step-decay", o.step_decay, "step shrink factor")->check(CLI::Range(0.01, 0.9999));
    c->add_option("--initial-step", o.initial_step, "initial logit step")->check(CLI::PositiveNumber);
  };
  auto add_sim = [&](CLI::App* c) {
    c->add_option("--scheme", o.scheme, "scheme JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--rates", o.rates, "comma separated rates")->required()->delimiter(',');
    c->add_option("--n", o.n, "blocklength");
    c->add_option("--eps", o.eps, "typicality slack");
    c->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    c->add_option("--seed", o.seed, "master seed");
    c->add_option("--csv", o.csv, "also write the metrics as CSV");
    c->add_option("--enum-cap", o.enum_cap, "largest exact leakage enumeration");
    c->add_flag("--no-leakage", o.no_leakage, "skip leakage measurement");
  };

  auto* region = app.add_subcommand("region", "evaluate or optimize rate-region bounds");
  region->require_subcommand(1);
  auto* inner_nofb = region->add_subcommand("inner-nofb", "inner bound without feedback");
  add_common(inner_nofb);
  add_search(inner_nofb);
  inner_nofb->add_option("--scheme", o.scheme, "evaluate this scheme instead of searching")->check(CLI::ExistingFile);
  inner_nofb->add_option("--weights", o.weights, "objective weights w0,w1,w2")->delimiter(',');
  inner_nofb->add_option("--cards", o.cards, "auxiliary cardinalities U0,U1,U2")->delimiter(',');
  auto* outer_nofb = region->add_subcommand("outer-nofb", "outer bound box without feedback");
  add_common(outer_nofb);
  add_search(outer_nofb);
  outer_nofb->add_option("--scheme", o.scheme, "evaluate at this scheme's input distribution")
      ->check(CLI::ExistingFile);
  auto* inner_fb = region->add_subcommand("inner-fb", "inner bound with one round of public feedback");
  add_common(inner_fb);
  inner_fb->add_option("--scheme", o.scheme, "feedback scheme JSON file")->required()->check(CLI::ExistingFile);
  auto* fm = region->add_subcommand("fm-verify", "compare the projected constraint system with the closed form");
  add_common(fm);
  fm->add_option("--scheme", o.scheme, "feedback scheme JSON file")->required()->check(CLI::ExistingFile);
  fm->add_option("--step", o.step, "grid step in bits")->check(CLI::PositiveNumber);
  fm->add_option("--tol", o.tol, "membership tolerance");
  fm->add_flag("--literal", o.literal, "use the literal second receiver-secrecy line");

  auto* simulate = app.add_subcommand("simulate", "finite-blocklength protocol simulation");
  simulate->require_subcommand(1);
  auto* sim_nofb = simulate->add_subcommand("nofb", "no feedback: Rt0,Rt1,Rt2,R0,R1,R2");
  add_common(sim_nofb);
  add_sim(sim_nofb);
  auto* sim_fb = simulate->add_subcommand("fb", "one round of feedback: Rp1,Rp2,R1,R2");
  add_common(sim_fb);
  add_sim(sim_fb);

  auto* reduce = app.add_subcommand("reduce", "channel reductions");
  reduce->require_subcommand(1);
  auto* wiretap = reduce->add_subcommand("wiretap", "reduce to a wiretap channel");
  add_common(wiretap);
  wiretap->add_option("--mode", o.mode, "nofb | fb_keep_rx1 | fb_keep_rx2");

  std::vector<std::string> argv_store = {"skagree"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitValidation;
  }

  try {
    if (*inner_nofb) run_inner_nofb(o, out);
    else if (*outer_nofb) run_outer_nofb(o, out);
    else if (*inner_fb) run_inner_fb(o, out);
    else if (*fm) run_fm_verify(o, out);
    else if (*sim_nofb) run_sim_nofb(o, out);
    else if (*sim_fb) run_sim_fb(o, out);
    else if (*wiretap) run_reduce(o, out);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace skagree
