#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anonelect/budget.hpp"
#include "anonelect/corpus.hpp"
#include "anonelect/eligibility.hpp"
#include "anonelect/error.hpp"
#include "anonelect/graph.hpp"
#include "anonelect/json_io.hpp"
#include "anonelect/protocol.hpp"
#include "anonelect/sim.hpp"
#include "anonelect/view.hpp"

using nlohmann::json;
using namespace anonelect;

namespace {

Configuration read_input(const std::string& path) {
  json j;
  if (path.empty() || path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    j = json::parse(buf.str());
  } else {
    std::ifstream in(path);
    if (!in)
      throw Error(Error::Code::kInvalidInput, "cannot open input: " + path);
    in >> j;
  }
  return configuration_from_json(j);
}

std::string bitstring(const BinaryMapping& m) {
  std::string s(m.n_bits, '0');
  for (std::uint64_t i = 0; i < m.n_bits; ++i)
    if (m.get(i)) s[i] = '1';
  return s;
}

json label_json(const Label& l) {
  json maps = json::array();
  for (const BinaryMapping& f : l.maps) maps.push_back(bitstring(f));
  return json{{"code", view_code(l.view)}, {"maps", std::move(maps)}};
}

const char* verdict_name(EcVerdict v) {
  switch (v) {
    case EcVerdict::kEligible: return "eligible";
    case EcVerdict::kNotEligible: return "not-eligible";
    case EcVerdict::kTriviallyEligibleSingleton: return "singleton";
  }
  return "?";
}

const char* status_name(SimStatus s) {
  switch (s) {
    case SimStatus::kRunning: return "running";
    case SimStatus::kElected: return "elected";
    case SimStatus::kTickBudget: return "tick-budget";
    case SimStatus::kMemoryBudget: return "memory-budget";
  }
  return "?";
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

// ---- check ----

json check_to_json(const EligibilityReport& rep) {
  json out{{"verdict", verdict_name(rep.verdict)},
           {"eligible", rep.eligible()},
           {"alpha", rep.alpha}};
  out["beta"] = rep.beta ? json(*rep.beta) : json();
  out["gamma"] = rep.gamma ? json(*rep.gamma) : json();
  out["alpha_twins"] = rep.alpha_twins
                           ? json{rep.alpha_twins->first,
                                  rep.alpha_twins->second}
                           : json();
  out["beta_pair"] = rep.beta_pair
                         ? json{rep.beta_pair->first, rep.beta_pair->second}
                         : json();
  out["gamma_trail"] =
      rep.gamma_trail ? json(format_trail(*rep.gamma_trail)) : json();
  return out;
}

void check_to_text(const EligibilityReport& rep, std::ostream& os) {
  os << "verdict " << verdict_name(rep.verdict) << "\n";
  os << "alpha " << (rep.alpha ? "true" : "false") << "\n";
  os << "beta " << (rep.beta ? (*rep.beta ? "true" : "false") : "-") << "\n";
  os << "gamma " << (rep.gamma ? (*rep.gamma ? "true" : "false") : "-")
     << "\n";
  if (rep.alpha_twins)
    os << "alpha-twins " << rep.alpha_twins->first << " "
       << rep.alpha_twins->second << "\n";
  if (rep.beta_pair)
    os << "beta-pair " << rep.beta_pair->first << " " << rep.beta_pair->second
       << "\n";
  if (rep.gamma_trail)
    os << "gamma-trail " << format_trail(*rep.gamma_trail) << "\n";
}

// ---- simulate ----

SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "synchronous" || s == "sync") return SchedulerKind::kSynchronous;
  if (s == "random") return SchedulerKind::kRandom;
  if (s == "stage-barrier-serial" || s == "serial")
    return SchedulerKind::kSerial;
  throw Error(Error::Code::kInvalidInput, "unknown scheduler: " + s);
}

json sim_result_json(const SimResult& r, Simulation& sim,
                     ProtocolContext& pc) {
  json agents = json::array();
  for (int i = 0; i < sim.agent_count(); ++i) {
    const Decider& d = sim.decider(i);
    json a{{"agent", i},
           {"home", sim.home(i)},
           {"at", sim.at(i)},
           {"mid_edge", sim.mid_edge(i)},
           {"exploring", d.exploring()},
           {"phase", d.phase()},
           {"entry", d.entry_index()},
           {"walking", d.walking()},
           {"walk_elements_done", d.walk_elements_done()},
           {"memory_tokens", memory_length(sim.memory(i))},
           {"elected", r.elected[i]}};
    a["label"] = r.final_labels[i] == kNoLabel
                     ? json()
                     : label_json(pc.labels().get(r.final_labels[i]));
    if (r.elected[i]) {
      a["elect_trail"] = format_trail(r.elect_trails[i]);
      a["resolved"] = r.resolved[i];
    }
    agents.push_back(std::move(a));
  }
  return json{{"status", status_name(r.status)},
              {"ticks", r.ticks},
              {"phases_fixed", r.ctx.sequences.size()},
              {"consistent", r.consistent},
              {"agents", std::move(agents)}};
}

// ---- corpus ----

struct CorpusFlags {
  int max_nodes = 4;
  int min_nodes = 2;
  int min_agents = 1;
  int max_degree = -1;
  bool dedup = false;
  std::string occupancy = "all";
  int samples = 8;
  std::uint64_t seed = 0;
};

void run_corpus(const CorpusFlags& cf, bool text, std::ostream& os) {
  if (cf.occupancy != "all" && cf.occupancy != "sampled")
    throw Error(Error::Code::kInvalidInput,
                "occupancy must be all or sampled");
  EnumerateOptions eo;
  eo.max_nodes = cf.max_nodes;
  eo.min_nodes = cf.min_nodes;
  eo.min_agents = cf.min_agents;
  eo.max_degree = cf.max_degree;
  eo.dedup = cf.dedup;

  auto emit = [&](const Configuration& g) {
    if (text) {
      std::string e;
      for (const auto& ed : g.edges()) {
        if (!e.empty()) e += ' ';
        e += std::to_string(ed.u) + ":" + std::to_string(ed.pu) + "-" +
             std::to_string(ed.v) + ":" + std::to_string(ed.pv);
      }
      os << "nodes=" << g.node_count() << " edges=[" << e << "] occupied="
         << join_ints(g.occupied(), ',') << "\n";
    } else {
      os << configuration_to_json(g).dump() << "\n";
    }
  };

  if (cf.occupancy == "all") {
    enumerate_configurations(eo, emit);
    return;
  }

  // Sampled occupancies: the enumerator emits all occupancies of one graph
  // consecutively, so sample within each same-edge-set block.
  std::mt19937_64 rng(cf.seed);
  std::vector<Configuration> block;
  std::vector<Configuration::Edge> block_edges;
  auto key = [](const std::vector<Configuration::Edge>& es) {
    std::vector<int> k;
    for (const auto& e : es) {
      k.push_back(e.u);
      k.push_back(e.pu);
      k.push_back(e.v);
      k.push_back(e.pv);
    }
    return k;
  };
  auto flush = [&]() {
    if (block.empty()) return;
    std::vector<std::size_t> idx(block.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t keep = std::min<std::size_t>(cf.samples, idx.size());
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) emit(block[i]);
    block.clear();
  };
  enumerate_configurations(eo, [&](const Configuration& g) {
    std::vector<Configuration::Edge> es = g.edges();
    if (block.empty() || key(es) != key(block_edges)) {
      flush();
      block_edges = es;
    }
    block.push_back(g);
  });
  flush();
}

// ---- verify ----

int run_verify(int max_nodes, int min_agents, int threads,
               const std::string& repro_dir, int max_counterexamples,
               bool progress, bool text, std::ostream& os) {
  CrossOptions co;
  co.max_nodes = max_nodes;
  co.min_agents = min_agents;
  co.threads = threads;
  co.max_counterexamples = max_counterexamples;
  std::function<void(std::uint64_t)> cb;
  if (progress)
    cb = [](std::uint64_t done) {
      if (done % 100 == 0) std::fprintf(stderr, "\r%llu configurations",
                                        (unsigned long long)done);
    };
  CrossStats st = cross_validate(co, cb);
  if (progress) std::fprintf(stderr, "\n");

  std::vector<std::string> files;
  if (!st.counterexamples.empty()) {
    std::filesystem::create_directories(repro_dir);
    int no = 0;
    for (const CrossCase& c : st.counterexamples) {
      char name[32];
      std::snprintf(name, sizeof name, "case-%04d.json", no++);
      std::string path = repro_dir + "/" + name;
      json rec{{"configuration", json::parse(c.config_json)},
               {"corpus_index", c.index},
               {"kind", c.kind},
               {"detail", c.detail},
               {"eligible", c.eligible},
               {"consistent", c.consistent},
               {"flags",
                {{"max_nodes", max_nodes}, {"min_agents", min_agents}}}};
      std::ofstream out(path);
      out << rec.dump(2) << "\n";
      files.push_back(path);
    }
  }

  if (text) {
    os << "configurations " << st.configurations << "\n"
       << "eligible " << st.eligible << "\n"
       << "consistent " << st.consistent << "\n"
       << "verdict-disagreements " << st.verdict_disagreements << "\n"
       << "mark-violations " << st.mark_violations << "\n"
       << "semi-violations " << st.semi_violations << "\n"
       << "errors " << st.errors << "\n"
       << (st.ok() ? "ok" : "FAIL") << "\n";
    for (const std::string& f : files) os << "repro " << f << "\n";
  } else {
    os << json{{"configurations", st.configurations},
               {"eligible", st.eligible},
               {"consistent", st.consistent},
               {"verdict_disagreements", st.verdict_disagreements},
               {"mark_violations", st.mark_violations},
               {"semi_violations", st.semi_violations},
               {"errors", st.errors},
               {"ok", st.ok()},
               {"repro_files", files}}
              .dump()
       << "\n";
  }
  if (st.ok()) return 0;
  return st.errors > 0 ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anonymous leader election on port-labeled graphs"};
  app.require_subcommand(1);
  std::string format = "json";
  app.add_option("--format", format, "json or text")
      ->check(CLI::IsMember({"json", "text"}));

  Budget env = budget_from_env();

  // check
  auto* c_check = app.add_subcommand(
      "check", "Decide eligibility of a configuration");
  std::string check_in = "-";
  bool check_all = false;
  c_check->add_option("--in", check_in, "configuration JSON (default stdin)");
  c_check->add_flag("--all", check_all,
                    "evaluate every clause, not just up to the verdict");

  // views
  auto* c_views = app.add_subcommand("views", "Dump truncated view codes");
  std::string views_in = "-";
  int views_depth = -1;
  bool views_enhanced = false;
  std::vector<int> views_nodes;
  c_views->add_option("--in", views_in, "configuration JSON (default stdin)");
  c_views->add_option("--depth", views_depth,
                      "view depth (default one less than the node count)");
  c_views->add_flag("--enhanced", views_enhanced,
                    "mark occupied positions and dump the marking");
  c_views->add_option("--node", views_nodes,
                      "restrict to these nodes (repeatable; default all)");

  // elect
  auto* c_elect = app.add_subcommand(
      "elect", "Closed-form protocol outcome (guaranteed marks)");
  std::string elect_in = "-";
  c_elect->add_option("--in", elect_in, "configuration JSON (default stdin)");

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "Half-step scheduler run");
  std::string sim_in = "-";
  std::string sim_sched = "synchronous";
  std::uint64_t sim_seed = 0;
  std::uint64_t sim_ticks = env.max_ticks;
  std::uint64_t sim_mem = env.max_memory_tokens;
  std::uint64_t sim_runs = 256;
  std::string sim_trace;
  c_sim->add_option("--in", sim_in, "configuration JSON (default stdin)");
  c_sim->add_option(
      "--scheduler", sim_sched,
      "synchronous | random | stage-barrier-serial | exhaustive");
  c_sim->add_option("--seed", sim_seed, "random scheduler seed");
  c_sim->add_option("--max-ticks", sim_ticks, "tick budget");
  c_sim->add_option("--max-memory-nodes", sim_mem,
                    "per-agent memory token budget");
  c_sim->add_option("--max-runs", sim_runs,
                    "schedule cap for the exhaustive scheduler");
  c_sim->add_option("--trace-out", sim_trace,
                    "trace file, JSON object per line (- for stdout)");

  // verify
  auto* c_verify = app.add_subcommand(
      "verify", "Cross-validate the checker against the executor");
  int v_max_nodes = 4, v_min_agents = 2, v_threads = env.threads;
  int v_max_ce = 16;
  std::string v_repro = "repro";
  bool v_progress = false;
  c_verify->add_option("--max-nodes", v_max_nodes, "corpus size bound");
  c_verify->add_option("--min-agents", v_min_agents,
                       "minimum agents per configuration");
  c_verify->add_option("--threads", v_threads, "worker threads (0 = auto)");
  c_verify->add_option("--repro-dir", v_repro,
                       "directory for counterexample repro files");
  c_verify->add_option("--max-counterexamples", v_max_ce,
                       "repro file cap");
  c_verify->add_flag("--progress", v_progress, "progress on stderr");

  // corpus
  auto* c_corpus = app.add_subcommand(
      "corpus", "Enumerate configurations, one JSON per line");
  CorpusFlags cf;
  c_corpus->add_option("--max-nodes", cf.max_nodes,
                       "size bound (hard cap 5)");
  c_corpus->add_option("--min-nodes", cf.min_nodes,
                       "smallest graph size (default 2)");
  c_corpus->add_option("--min-agents", cf.min_agents,
                       "minimum agents per occupancy");
  c_corpus->add_option("--max-degree", cf.max_degree,
                       "degree cap (-1 = unrestricted)");
  c_corpus->add_flag("--dedup", cf.dedup,
                     "one representative per isomorphism class");
  c_corpus->add_option("--occupancy", cf.occupancy, "all | sampled");
  c_corpus->add_option("--samples", cf.samples,
                       "occupancies kept per graph when sampled");
  c_corpus->add_option("--seed", cf.seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);
  const bool text = format == "text";

  try {
    if (*c_check) {
      Configuration g = read_input(check_in);
      ViewArena arena;
      EcOptions opt;
      opt.evaluate_all = check_all;
      EligibilityReport rep = check_ec(arena, g, opt);
      if (text)
        check_to_text(rep, std::cout);
      else
        std::cout << check_to_json(rep).dump() << "\n";
      return 0;
    }

    if (*c_views) {
      Configuration g = read_input(views_in);
      ViewArena arena;
      int depth = views_depth >= 0 ? views_depth : g.node_count() - 1;
      std::vector<int> nodes = views_nodes;
      if (nodes.empty())
        for (int v = 0; v < g.node_count(); ++v) nodes.push_back(v);
      json views = json::array();
      for (int v : nodes) {
        if (v < 0 || v >= g.node_count())
          throw Error(Error::Code::kInvalidInput,
                      "node out of range: " + std::to_string(v));
        ViewRef t = views_enhanced ? enhanced_view(arena, g, v, depth)
                                   : truncated_view(arena, g, v, depth);
        std::vector<int> code = view_code(t);
        if (text) {
          std::cout << "node " << v << " code " << join_ints(code, ',');
          if (views_enhanced)
            std::cout << " marks " << bitstring(mapping_of_marked_view(t));
          std::cout << "\n";
        } else {
          json jv{{"node", v}, {"code", code}};
          if (views_enhanced)
            jv["marks"] = bitstring(mapping_of_marked_view(t));
          views.push_back(std::move(jv));
        }
      }
      if (!text)
        std::cout << json{{"depth", depth},
                          {"enhanced", views_enhanced},
                          {"views", std::move(views)}}
                         .dump()
                  << "\n";
      return 0;
    }

    if (*c_elect) {
      Configuration g = read_input(elect_in);
      ProtocolContext pc(g.bound());
      SemanticOutcome out = run_semantic(pc, g);
      if (text) {
        std::cout << "consistent " << (out.consistent ? "true" : "false")
                  << "\n";
        if (!out.consistent) std::cout << "diagnosis " << out.diagnosis
                                       << "\n";
        for (std::size_t i = 0; i < out.agents.size(); ++i)
          std::cout << "agent " << out.agents[i] << " resolved "
                    << out.resolved[i] << " trail "
                    << format_trail(out.leader_trails[i]) << "\n";
      } else {
        json agents = json::array();
        for (std::size_t i = 0; i < out.agents.size(); ++i)
          agents.push_back(
              json{{"agent", out.agents[i]},
                   {"label", label_json(pc.labels().get(out.final_labels[i]))},
                   {"leader_trail", format_trail(out.leader_trails[i])},
                   {"resolved", out.resolved[i]}});
        json j{{"consistent", out.consistent},
               {"agents", std::move(agents)}};
        if (!out.consistent) j["diagnosis"] = out.diagnosis;
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (*c_sim) {
      Configuration g = read_input(sim_in);
      SimOptions so;
      so.seed = sim_seed;
      so.max_ticks = sim_ticks;
      so.max_memory_tokens = sim_mem;
      std::ofstream trace_file;
      if (!sim_trace.empty()) {
        if (sim_trace == "-") {
          so.trace = &std::cout;
        } else {
          trace_file.open(sim_trace);
          if (!trace_file)
            throw Error(Error::Code::kInvalidInput,
                        "cannot open trace file: " + sim_trace);
          so.trace = &trace_file;
        }
      }
      if (sim_sched == "exhaustive") {
        so.trace = nullptr;
        ExhaustiveReport rep = exhaustive_experiment(g, so, sim_runs);
        if (text) {
          std::cout << "runs " << rep.runs << (rep.capped ? " (capped)" : "")
                    << "\n";
          for (const ExhaustiveOutcome& o : rep.distinct) {
            std::cout << "outcome " << status_name(o.status) << " consistent "
                      << (o.consistent ? "true" : "false") << " resolved "
                      << join_ints(o.resolved, ',') << "\n";
          }
        } else {
          json distinct = json::array();
          for (const ExhaustiveOutcome& o : rep.distinct)
            distinct.push_back(json{{"status", status_name(o.status)},
                                    {"consistent", o.consistent},
                                    {"resolved", o.resolved}});
          std::cout << json{{"runs", rep.runs},
                            {"capped", rep.capped},
                            {"distinct", std::move(distinct)}}
                           .dump()
                    << "\n";
        }
        return 0;
      }
      so.scheduler = parse_scheduler(sim_sched);
      ProtocolContext pc(g.bound());
      Simulation sim(pc, g, so);
      sim.run();
      SimResult r = sim.result();
      if (text) {
        std::cout << "status " << status_name(r.status) << " ticks "
                  << r.ticks << " phases " << r.ctx.sequences.size()
                  << " consistent " << (r.consistent ? "true" : "false")
                  << "\n";
        for (int i = 0; i < sim.agent_count(); ++i) {
          const Decider& d = sim.decider(i);
          std::cout << "agent " << i << " home " << sim.home(i) << " at "
                    << sim.at(i) << (sim.mid_edge(i) ? " mid-edge" : "")
                    << " phase " << d.phase() << " entry " << d.entry_index()
                    << " memory " << memory_length(sim.memory(i));
          if (r.elected[i])
            std::cout << " elected resolved " << r.resolved[i];
          std::cout << "\n";
        }
      } else {
        std::cout << sim_result_json(r, sim, pc).dump() << "\n";
      }
      return 0;
    }

    if (*c_verify)
      return run_verify(v_max_nodes, v_min_agents, v_threads, v_repro,
                        v_max_ce, v_progress, text, std::cout);

    if (*c_corpus) {
      run_corpus(cf, text, std::cout);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }
  return 2;
}
