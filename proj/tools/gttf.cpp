// Command-line surface: graph ingestion, transition-power estimation,
// embedding training, link-prediction evaluation, statistical audits,
// traversal benchmarks, and manifest-driven reruns.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gttf/estimators.hpp"
#include "gttf/evaluation.hpp"
#include "gttf/generators.hpp"
#include "gttf/graph.hpp"
#include "gttf/graph_io.hpp"
#include "gttf/learning.hpp"
#include "gttf/report.hpp"
#include "gttf/rng.hpp"
#include "gttf/specializations.hpp"
#include "gttf/stats.hpp"
#include "gttf/traversal.hpp"

namespace {

using json = nlohmann::json;

int run_cli(const std::vector<std::string>& args, int depth);

// ---------------------------------------------------------------------------
// Shared plumbing.
// ---------------------------------------------------------------------------

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double lap() {
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
    return s;
  }
};

struct Manifest {
  json j;
  Manifest(const std::string& command, const std::vector<std::string>& argv,
           std::uint64_t seed, std::uint64_t workers) {
    j["command"] = command;
    j["argv"] = argv;
    j["seed"] = seed;
    j["workers"] = workers;
    j["outputs"] = json::array();
    j["timings_sec"] = json::object();
  }
  void graph_stats(std::uint64_t n, std::uint64_t m) {
    j["graph"] = {{"n", n}, {"m", m}};
  }
  void output(const std::string& path) { j["outputs"].push_back(path); }
  void timing(const std::string& phase, double sec) { j["timings_sec"][phase] = sec; }
  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
  }
};

struct GraphFlags {
  std::string path;
  bool map_ids = false;
  bool no_self_loops = false;
  bool directed = false;
};

void add_graph_flags(CLI::App* cmd, GraphFlags& gf) {
  cmd->add_option("--graph", gf.path, "edge list: src<TAB>dst[<TAB>weight], # comments")
      ->required();
  cmd->add_flag("--map-ids", gf.map_ids,
                "accept arbitrary string ids; writes <out>.ids translation table");
  cmd->add_flag("--no-self-loops", gf.no_self_loops,
                "treat self-loop input edges as errors");
  cmd->add_flag("--directed", gf.directed, "do not symmetrize input edges");
}

gttf::LoadedGraph load_graph(const GraphFlags& gf) {
  gttf::LoadOptions opt;
  opt.map_ids = gf.map_ids;
  opt.allow_self_loops = !gf.no_self_loops;
  opt.directed = gf.directed;
  return gttf::load_edge_list(gf.path, opt);
}

void append_graph_argv(std::vector<std::string>& argv, const GraphFlags& gf) {
  argv.push_back("--graph");
  argv.push_back(gf.path);
  if (gf.map_ids) argv.push_back("--map-ids");
  if (gf.no_self_loops) argv.push_back("--no-self-loops");
  if (gf.directed) argv.push_back("--directed");
}

template <class T>
std::string join_csv(const std::vector<T>& xs) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    os << xs[i];
  }
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// estimate-tk
// ---------------------------------------------------------------------------

struct EstimateOpts {
  GraphFlags graph;
  std::uint64_t k = 2;
  std::uint64_t fanout = 3;
  std::vector<std::uint64_t> batch;
  bool audit = false;
  std::uint64_t runs = 10000;
  bool without_replacement = false;
  std::string out = "tk.tsv";
  std::string report_path = "audit.txt";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_estimate_tk(const EstimateOpts& o) {
  Stopwatch sw;
  const gttf::LoadedGraph lg = load_graph(o.graph);
  const gttf::CompactAdj adj = gttf::build_compact_adj(lg.edges, !o.graph.directed);
  const double t_load = sw.lap();

  std::vector<gttf::NodeId> batch = o.batch;
  if (batch.empty()) {
    if (adj.n > 1000)
      throw std::invalid_argument(
          "graph has more than 1000 nodes; pass an explicit --batch");
    batch.resize(adj.n);
    std::iota(batch.begin(), batch.end(), gttf::NodeId{0});
  }

  std::vector<std::string> argv{"estimate-tk"};
  append_graph_argv(argv, o.graph);
  for (const auto& [flag, val] :
       {std::pair<std::string, std::string>{"--k", std::to_string(o.k)},
        {"--fanout", std::to_string(o.fanout)},
        {"--batch", join_csv(o.batch)},
        {"--runs", std::to_string(o.runs)},
        {"--out", o.out},
        {"--report", o.report_path},
        {"--seed", std::to_string(o.seed)},
        {"--workers", std::to_string(o.workers)},
        {"--manifest", o.manifest}}) {
    if (flag == "--batch" && o.batch.empty()) continue;
    argv.push_back(flag);
    argv.push_back(val);
  }
  if (o.audit) argv.push_back("--audit");
  if (o.without_replacement) argv.push_back("--without-replacement");

  Manifest man("estimate-tk", argv, o.seed, o.workers);
  man.graph_stats(adj.n, adj.m);
  man.timing("load", t_load);

  int code = 0;
  if (o.audit) {
    const gttf::Report unb = gttf::audit_unbiasedness(
        adj, batch, o.k, o.fanout, o.runs, gttf::RngStream{o.seed});
    const gttf::Report var = gttf::audit_variance(
        adj, batch, o.k, o.fanout, o.runs, gttf::RngStream{o.seed});
    std::string body = unb.str() + "\n" + var.str();
    write_text(o.report_path, body);
    std::cout << body;
    man.output(o.report_path);
    const bool ok = unb.get("pass") == std::string("true") &&
                    var.get("pass") == std::string("true");
    code = ok ? 0 : 1;
  } else {
    gttf::TraverseOptions topt;
    topt.workers = o.workers;
    topt.without_replacement = o.without_replacement;
    const gttf::TransitionEstimate est = gttf::estimate_tk(
        adj, batch, o.k, o.fanout, gttf::RngStream{o.seed}, topt);
    std::ostringstream body;
    body << std::setprecision(17);
    for (const auto& [key, val] : est.entries)
      body << key.first << '\t' << key.second << '\t' << val << '\n';
    write_text(o.out, body.str());
    man.output(o.out);
  }
  man.timing("run", sw.lap());
  man.save(o.manifest);
  return code;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string method;
  GraphFlags graph;
  std::uint64_t dim = 16;
  std::vector<std::uint64_t> fanouts = {3, 3};
  std::uint64_t window = 5;
  std::uint64_t rounds = 200;
  std::uint64_t batch_size = 0;
  std::uint64_t negatives = 0;
  double lr = 0.5;
  double lr_decay = 0.2;
  std::uint64_t lr_interval = 50;
  double p = 1.0;
  double q = 1.0;
  std::vector<double> ctx_init;
  bool without_replacement = false;
  std::string out = "embeddings.txt";
  std::string loss_out = "loss.csv";
  std::string ctx_out = "ctx.csv";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_train(const TrainOpts& o) {
  Stopwatch sw;
  const gttf::LoadedGraph lg = load_graph(o.graph);
  const gttf::CompactAdj adj = gttf::build_compact_adj(lg.edges, !o.graph.directed);
  const double t_load = sw.lap();

  gttf::TrainConfig cfg;
  cfg.batch = o.batch_size;
  cfg.fanouts = o.fanouts;
  cfg.window = o.window;
  cfg.negatives = o.negatives;
  cfg.dim = o.dim;
  cfg.schedule = {o.lr, o.lr_decay, o.lr_interval};
  cfg.rounds = o.rounds;
  cfg.seed = o.seed;
  cfg.traverse.workers = o.workers;
  cfg.traverse.without_replacement = o.without_replacement;

  std::vector<std::string> argv{"train", o.method};
  append_graph_argv(argv, o.graph);
  for (const auto& [flag, val] :
       {std::pair<std::string, std::string>{"--dim", std::to_string(o.dim)},
        {"--fanouts", join_csv(o.fanouts)},
        {"--window", std::to_string(o.window)},
        {"--rounds", std::to_string(o.rounds)},
        {"--batch-size", std::to_string(o.batch_size)},
        {"--negatives", std::to_string(o.negatives)},
        {"--lr", fmt(o.lr)},
        {"--lr-decay", fmt(o.lr_decay)},
        {"--lr-interval", std::to_string(o.lr_interval)},
        {"--p", fmt(o.p)},
        {"--q", fmt(o.q)},
        {"--ctx-init", join_csv(o.ctx_init)},
        {"--out", o.out},
        {"--loss-out", o.loss_out},
        {"--ctx-out", o.ctx_out},
        {"--seed", std::to_string(o.seed)},
        {"--workers", std::to_string(o.workers)},
        {"--manifest", o.manifest}}) {
    if (flag == "--ctx-init" && o.ctx_init.empty()) continue;
    argv.push_back(flag);
    argv.push_back(val);
  }
  if (o.without_replacement) argv.push_back("--without-replacement");

  Manifest man("train", argv, o.seed, o.workers);
  man.graph_stats(adj.n, adj.m);
  man.timing("load", t_load);

  gttf::TrainResult res;
  try {
    if (o.method == "deepwalk") {
      res = gttf::train_deepwalk(adj, cfg);
    } else if (o.method == "node2vec") {
      res = gttf::train_node2vec(adj, cfg, o.p, o.q);
    } else {
      Eigen::VectorXd ctx;
      if (!o.ctx_init.empty()) {
        ctx = Eigen::Map<const Eigen::VectorXd>(
            o.ctx_init.data(), static_cast<Eigen::Index>(o.ctx_init.size()));
        res = gttf::train_wys(adj, cfg, &ctx);
      } else {
        res = gttf::train_wys(adj, cfg);
      }
    }
  } catch (const gttf::TrainingDiverged& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return 1;
  }
  man.timing("train", sw.lap());

  gttf::save_embeddings(o.out, res.model.combined());
  man.output(o.out);
  gttf::save_loss_csv(o.loss_out, res.loss);
  man.output(o.loss_out);
  if (o.method == "wys") {
    std::ostringstream body;
    body << "round";
    for (Eigen::Index i = 0; i < res.ctx.size(); ++i) body << ",c" << i;
    body << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < res.ctx_trace.size(); ++r) {
      body << r;
      for (Eigen::Index i = 0; i < res.ctx_trace[r].size(); ++i)
        body << ',' << res.ctx_trace[r](i);
      body << '\n';
    }
    write_text(o.ctx_out, body.str());
    man.output(o.ctx_out);
  }
  if (o.graph.map_ids) {
    gttf::save_id_table(o.out + ".ids", lg.id_table);
    man.output(o.out + ".ids");
  }
  man.timing("write", sw.lap());
  man.save(o.manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// eval-linkpred
// ---------------------------------------------------------------------------

struct EvalOpts {
  GraphFlags graph;
  std::string embeddings;
  double fraction = 0.2;
  std::uint64_t negatives_per_edge = 1;
  std::uint64_t split_seed = 0;
  std::string train_out;
  std::string metrics_out = "metrics.txt";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_eval_linkpred(const EvalOpts& o) {
  Stopwatch sw;
  const gttf::LoadedGraph lg = load_graph(o.graph);
  const double t_load = sw.lap();
  const gttf::LinkSplit split = gttf::make_split(
      lg.edges, o.fraction, o.negatives_per_edge, o.split_seed);

  std::vector<std::string> argv{"eval-linkpred"};
  append_graph_argv(argv, o.graph);
  for (const auto& [flag, val] :
       {std::pair<std::string, std::string>{"--fraction", fmt(o.fraction)},
        {"--negatives-per-edge", std::to_string(o.negatives_per_edge)},
        {"--split-seed", std::to_string(o.split_seed)},
        {"--embeddings", o.embeddings},
        {"--train-out", o.train_out},
        {"--metrics-out", o.metrics_out},
        {"--seed", std::to_string(o.seed)},
        {"--workers", std::to_string(o.workers)},
        {"--manifest", o.manifest}}) {
    if (flag == "--embeddings" && o.embeddings.empty()) continue;
    if (flag == "--train-out" && o.train_out.empty()) continue;
    argv.push_back(flag);
    argv.push_back(val);
  }
  Manifest man("eval-linkpred", argv, o.seed, o.workers);
  man.graph_stats(lg.edges.n, lg.edges.edges.size());
  man.timing("load", t_load);
  man.j["split"] = {{"fraction", o.fraction},
                    {"test_edges", split.test.size()},
                    {"train_edges", split.train.edges.size()},
                    {"train_connected", split.train_connected}};

  if (!o.train_out.empty()) {
    gttf::save_edge_list(o.train_out, split.train);
    man.output(o.train_out);
  }
  if (!o.embeddings.empty()) {
    const Eigen::MatrixXd z = gttf::load_embeddings(o.embeddings);
    const gttf::EvalScores scores = gttf::score_split(z, split);
    gttf::Report rep;
    rep.add("roc_auc", gttf::roc_auc(scores.pairs));
    rep.add("mean_rank", gttf::mean_rank(scores.groups));
    rep.add("n_test", std::uint64_t(split.test.size()));
    rep.add("negatives_per_edge", o.negatives_per_edge);
    rep.add("train_connected", split.train_connected);
    rep.save(o.metrics_out);
    std::cout << rep.str();
    man.output(o.metrics_out);
  }
  man.timing("run", sw.lap());
  man.save(o.manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// bench-traverse
// ---------------------------------------------------------------------------

struct BenchOpts {
  std::vector<std::uint64_t> sizes = {1000, 100000};
  std::uint64_t batch_size = 64;
  std::vector<std::uint64_t> fanouts = {3, 3};
  std::uint64_t repeats = 20;
  double avg_degree = 10.0;
  std::string out = "bench.txt";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_bench_traverse(const BenchOpts& o) {
  if (o.sizes.empty() || o.repeats == 0)
    throw std::invalid_argument("bench-traverse: need sizes and repeats");
  std::vector<std::string> argv{"bench-traverse",
                                "--sizes", join_csv(o.sizes),
                                "--batch-size", std::to_string(o.batch_size),
                                "--fanouts", join_csv(o.fanouts),
                                "--repeats", std::to_string(o.repeats),
                                "--avg-degree", fmt(o.avg_degree),
                                "--out", o.out,
                                "--seed", std::to_string(o.seed),
                                "--workers", std::to_string(o.workers),
                                "--manifest", o.manifest};
  Manifest man("bench-traverse", argv, o.seed, o.workers);

  gttf::TraverseOptions topt;
  topt.workers = o.workers;
  auto noop = [](std::span<const gttf::NodeId>, gttf::NodeId,
                 const gttf::VisitInfo&) {};
  std::ostringstream body;
  body << std::setprecision(6);
  std::vector<double> means;
  Stopwatch total;
  for (std::uint64_t n : o.sizes) {
    if (n < 2) throw std::invalid_argument("bench-traverse: size must be >= 2");
    const double p = std::min(1.0, o.avg_degree / static_cast<double>(n - 1));
    const gttf::EdgeList list =
        gttf::erdos_renyi(n, p, gttf::hash_keys(o.seed, n));
    const gttf::CompactAdj adj = gttf::build_compact_adj(list, true);
    gttf::SplitMix64 pick{gttf::hash_keys(o.seed, gttf::rng_tag::batch, n)};
    std::vector<gttf::NodeId> batch(o.batch_size);
    for (auto& u : batch) u = pick.index(adj.n);
    // One untimed warm-up run per size.
    gttf::traverse(adj, batch, o.fanouts, noop, gttf::UniformBias{},
                   gttf::RngStream{o.seed}, topt);
    std::vector<double> times;
    for (std::uint64_t r = 0; r < o.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      gttf::traverse(adj, batch, o.fanouts, noop, gttf::UniformBias{},
                     gttf::RngStream{o.seed}.substream(r), topt);
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    const double m = gttf::mean(times);
    const double sd = std::sqrt(gttf::variance(times, m));
    means.push_back(m);
    body << "n=" << adj.n << " m=" << adj.m << " batch=" << o.batch_size
         << " repeats=" << o.repeats << " mean_ms=" << m << " stddev_ms=" << sd
         << '\n';
  }
  const auto [lo, hi] = std::minmax_element(o.sizes.begin(), o.sizes.end());
  if (o.sizes.size() >= 2 && *hi >= 100 * *lo) {
    const auto [ml, mh] = std::minmax_element(means.begin(), means.end());
    const double ratio = *ml > 0.0 ? *mh / *ml : 0.0;
    body << "ratio=" << ratio << '\n';
    body << "pass=" << (ratio <= 2.0 ? "true" : "false") << '\n';
    write_text(o.out, body.str());
    std::cout << body.str();
    man.output(o.out);
    man.timing("total", total.lap());
    man.save(o.manifest);
    return ratio <= 2.0 ? 0 : 1;
  }
  write_text(o.out, body.str());
  std::cout << body.str();
  man.output(o.out);
  man.timing("total", total.lap());
  man.save(o.manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckOpts {
  std::string graph_path;  // optional; default = built-in demo graph
  bool map_ids = false;
  bool all = false;
  std::vector<int> sections;
  std::uint64_t k = 2;
  std::uint64_t fanout = 3;
  bool fanout_given = false;
  std::uint64_t runs = 10000;
  std::uint64_t dim = 4;
  std::uint64_t window = 5;
  std::vector<double> coeffs = {0.6, 0.4};
  std::uint64_t alpha = 3;
  std::uint64_t ens_n = 6;
  std::string report_path = "check.txt";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_check(const CheckOpts& o) {
  std::vector<int> sections = o.sections;
  if (o.all) sections = {1, 2, 3, 4, 5, 8};
  if (sections.empty())
    throw std::invalid_argument("check: pass --all or --prop with ids from {1,2,3,4,5,8}");
  for (int s : sections)
    if (s != 1 && s != 2 && s != 3 && s != 4 && s != 5 && s != 8)
      throw std::invalid_argument("check: unknown section " + std::to_string(s) +
                                  " (valid: 1,2,3,4,5,8)");

  gttf::EdgeList list;
  if (o.graph_path.empty()) {
    list = gttf::demo_graph();
  } else {
    gttf::LoadOptions lo;
    lo.map_ids = o.map_ids;
    lo.allow_self_loops = true;
    list = gttf::load_edge_list(o.graph_path, lo).edges;
  }
  const gttf::CompactAdj adj = gttf::build_compact_adj(list, true);
  std::vector<gttf::NodeId> batch(adj.n);
  std::iota(batch.begin(), batch.end(), gttf::NodeId{0});

  std::vector<std::string> argv{"check"};
  if (!o.graph_path.empty()) {
    argv.push_back("--graph");
    argv.push_back(o.graph_path);
    if (o.map_ids) argv.push_back("--map-ids");
  }
  for (int s : sections) {
    argv.push_back("--prop");
    argv.push_back(std::to_string(s));
  }
  for (const auto& [flag, val] :
       {std::pair<std::string, std::string>{"--k", std::to_string(o.k)},
        {"--runs", std::to_string(o.runs)},
        {"--dim", std::to_string(o.dim)},
        {"--window", std::to_string(o.window)},
        {"--coeffs", join_csv(o.coeffs)},
        {"--alpha", std::to_string(o.alpha)},
        {"--n", std::to_string(o.ens_n)},
        {"--report", o.report_path},
        {"--seed", std::to_string(o.seed)},
        {"--workers", std::to_string(o.workers)},
        {"--manifest", o.manifest}}) {
    argv.push_back(flag);
    argv.push_back(val);
  }
  if (o.fanout_given) {
    argv.push_back("--fanout");
    argv.push_back(std::to_string(o.fanout));
  }
  Manifest man("check", argv, o.seed, o.workers);
  man.graph_stats(adj.n, adj.m);

  Stopwatch sw;
  std::ostringstream body;
  bool ok = true;
  for (int s : sections) {
    gttf::Report rep;
    const std::uint64_t f = o.fanout_given ? o.fanout : (s == 8 ? 1 : 3);
    switch (s) {
      case 1:
        rep = gttf::audit_unbiasedness(adj, batch, o.k, f, o.runs,
                                       gttf::RngStream{o.seed});
        break;
      case 2:
        rep = gttf::audit_variance(adj, batch, o.k, f, o.runs,
                                   gttf::RngStream{o.seed});
        break;
      case 3:
        rep = gttf::audit_factorization_gradient(adj, o.coeffs, f, o.dim,
                                                 o.runs, gttf::RngStream{o.seed});
        break;
      case 4: {
        const std::vector<std::uint64_t> fanouts{f, f};
        rep = gttf::audit_skipgram_gradient(adj, o.dim, o.window, fanouts, 5,
                                            o.runs, gttf::RngStream{o.seed});
        break;
      }
      case 5:
        rep = gttf::audit_renormalized_mean(adj, f, o.runs,
                                            gttf::RngStream{o.seed});
        break;
      case 8:
        rep = gttf::ensemble_equivalence_check(o.alpha, o.ens_n, f, o.seed);
        break;
      default:
        break;
    }
    body << "section=" << s << '\n' << rep.str() << '\n';
    if (rep.get("pass") != std::string("true")) ok = false;
    man.timing("section_" + std::to_string(s), sw.lap());
  }
  write_text(o.report_path, body.str());
  std::cout << body.str();
  man.output(o.report_path);
  man.save(o.manifest);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gen-graph
// ---------------------------------------------------------------------------

struct GenOpts {
  std::string kind;
  std::uint64_t n = 0;
  double p = 0.1;
  std::uint64_t alpha = 3;
  std::string out = "graph.tsv";
  std::uint64_t seed = 0;
  std::uint64_t workers = 1;
  std::string manifest = "run.manifest.json";
};

int cmd_gen_graph(const GenOpts& o) {
  gttf::EdgeList list;
  if (o.kind == "er") {
    list = gttf::erdos_renyi(o.n, o.p, o.seed);
  } else if (o.kind == "regular") {
    list = gttf::random_regular(o.n, o.alpha, o.seed);
  } else if (o.kind == "barbell") {
    list = gttf::barbell(o.n);
  } else if (o.kind == "demo") {
    list = gttf::demo_graph();
  } else {
    throw std::invalid_argument("gen-graph: kind must be er|regular|barbell|demo");
  }
  gttf::save_edge_list(o.out, list);
  std::vector<std::string> argv{"gen-graph",
                                "--kind", o.kind,
                                "--n", std::to_string(o.n),
                                "--p", fmt(o.p),
                                "--alpha", std::to_string(o.alpha),
                                "--out", o.out,
                                "--seed", std::to_string(o.seed),
                                "--workers", std::to_string(o.workers),
                                "--manifest", o.manifest};
  Manifest man("gen-graph", argv, o.seed, o.workers);
  man.graph_stats(list.n, list.edges.size());
  man.output(o.out);
  man.save(o.manifest);
  std::cout << "wrote " << o.out << " (n=" << list.n
            << ", edges=" << list.edges.size() << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rerun
// ---------------------------------------------------------------------------

int cmd_rerun(const std::string& manifest_path, int depth) {
  if (depth > 2) throw std::runtime_error("rerun: manifest chain too deep");
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json j;
  in >> j;
  if (!j.contains("argv") || !j["argv"].is_array())
    throw std::runtime_error("manifest lacks argv array: " + manifest_path);
  std::vector<std::string> argv;
  for (const auto& a : j["argv"]) argv.push_back(a.get<std::string>());
  return run_cli(argv, depth + 1);
}

// ---------------------------------------------------------------------------
// Wiring.
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, int depth) {
  CLI::App app{"graph traversal engine: sampled walk forests, transition-power "
               "estimation, embedding training, and statistical audits"};
  app.require_subcommand(1);

  EstimateOpts est;
  auto* c_est = app.add_subcommand("estimate-tk",
                                   "estimate a transition-matrix power from sampled forests");
  add_graph_flags(c_est, est.graph);
  c_est->add_option("--k", est.k, "power / walk depth")->capture_default_str();
  c_est->add_option("--fanout", est.fanout, "children per expansion")->capture_default_str();
  c_est->add_option("--batch", est.batch, "seed node ids (default: all nodes when n <= 1000)")
      ->delimiter(',');
  c_est->add_flag("--audit", est.audit, "run mean/variance audits instead of one estimate");
  c_est->add_option("--runs", est.runs, "Monte-Carlo repetitions for --audit")
      ->capture_default_str();
  c_est->add_flag("--without-replacement", est.without_replacement,
                  "draw children without replacement");
  c_est->add_option("--out", est.out, "entries file: u<TAB>v<TAB>value")->capture_default_str();
  c_est->add_option("--report", est.report_path, "audit report path")->capture_default_str();
  c_est->add_option("--seed", est.seed, "RNG seed")->capture_default_str();
  c_est->add_option("--workers", est.workers, "traversal worker threads")->capture_default_str();
  c_est->add_option("--manifest", est.manifest, "manifest path")->capture_default_str();

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train", "train embeddings over sampled walk forests");
  c_tr->add_option("method", tr.method, "deepwalk | node2vec | wys")
      ->required()
      ->check(CLI::IsMember({"deepwalk", "node2vec", "wys"}));
  add_graph_flags(c_tr, tr.graph);
  c_tr->add_option("--dim", tr.dim, "embedding dimension")->capture_default_str();
  c_tr->add_option("--fanouts", tr.fanouts, "per-level fanouts")
      ->delimiter(',')->capture_default_str();
  c_tr->add_option("--window", tr.window, "context window")->capture_default_str();
  c_tr->add_option("--rounds", tr.rounds, "training rounds")->capture_default_str();
  c_tr->add_option("--batch-size", tr.batch_size, "seeds per round (0 = all nodes)")
      ->capture_default_str();
  c_tr->add_option("--negatives", tr.negatives,
                   "negative samples per round (0 = method default)")
      ->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "initial learning rate")->capture_default_str();
  c_tr->add_option("--lr-decay", tr.lr_decay, "rate multiplier per interval")
      ->capture_default_str();
  c_tr->add_option("--lr-interval", tr.lr_interval, "steps per decay")->capture_default_str();
  c_tr->add_option("--p", tr.p, "return discount (node2vec)")->capture_default_str();
  c_tr->add_option("--q", tr.q, "in-out discount (node2vec)")->capture_default_str();
  c_tr->add_option("--ctx-init", tr.ctx_init,
                   "initial context coefficients (wys; default all ones)")
      ->delimiter(',');
  c_tr->add_flag("--without-replacement", tr.without_replacement,
                 "draw children without replacement");
  c_tr->add_option("--out", tr.out, "embeddings file")->capture_default_str();
  c_tr->add_option("--loss-out", tr.loss_out, "loss CSV")->capture_default_str();
  c_tr->add_option("--ctx-out", tr.ctx_out, "context trace CSV (wys)")->capture_default_str();
  c_tr->add_option("--seed", tr.seed, "RNG seed")->capture_default_str();
  c_tr->add_option("--workers", tr.workers, "traversal worker threads")->capture_default_str();
  c_tr->add_option("--manifest", tr.manifest, "manifest path")->capture_default_str();

  EvalOpts ev;
  auto* c_ev = app.add_subcommand("eval-linkpred",
                                  "hold out edges, score with embeddings, report AUC and rank");
  add_graph_flags(c_ev, ev.graph);
  c_ev->add_option("--embeddings", ev.embeddings,
                   "embeddings file (omit to only materialize the split)");
  c_ev->add_option("--fraction", ev.fraction, "held-out edge fraction")->capture_default_str();
  c_ev->add_option("--negatives-per-edge", ev.negatives_per_edge,
                   "sampled non-edges per test edge")->capture_default_str();
  c_ev->add_option("--split-seed", ev.split_seed, "split RNG seed")->capture_default_str();
  c_ev->add_option("--train-out", ev.train_out, "write the train edge list here");
  c_ev->add_option("--metrics-out", ev.metrics_out, "metrics file")->capture_default_str();
  c_ev->add_option("--seed", ev.seed, "RNG seed (unused by the split; see --split-seed)")
      ->capture_default_str();
  c_ev->add_option("--workers", ev.workers, "accepted for interface parity")
      ->capture_default_str();
  c_ev->add_option("--manifest", ev.manifest, "manifest path")->capture_default_str();

  BenchOpts be;
  auto* c_be = app.add_subcommand("bench-traverse",
                                  "time identical traversals across graph sizes");
  c_be->add_option("--sizes", be.sizes, "graph sizes")->delimiter(',')->capture_default_str();
  c_be->add_option("--batch-size", be.batch_size, "seeds per traversal")->capture_default_str();
  c_be->add_option("--fanouts", be.fanouts, "per-level fanouts")
      ->delimiter(',')->capture_default_str();
  c_be->add_option("--repeats", be.repeats, "timed repetitions per size")->capture_default_str();
  c_be->add_option("--avg-degree", be.avg_degree, "target mean degree of the synthetic graphs")
      ->capture_default_str();
  c_be->add_option("--out", be.out, "timing table path")->capture_default_str();
  c_be->add_option("--seed", be.seed, "RNG seed")->capture_default_str();
  c_be->add_option("--workers", be.workers, "traversal worker threads")->capture_default_str();
  c_be->add_option("--manifest", be.manifest, "manifest path")->capture_default_str();

  CheckOpts ck;
  auto* c_ck = app.add_subcommand("check", "run the statistical audit suite");
  c_ck->add_option("--graph", ck.graph_path,
                   "edge list (default: built-in 5-node demo graph)");
  c_ck->add_flag("--map-ids", ck.map_ids, "accept arbitrary string ids");
  c_ck->add_flag("--all", ck.all, "run every section");
  c_ck->add_option("--prop", ck.sections,
                   "section ids: 1 estimator mean, 2 estimator variance, "
                   "3 factorization gradient, 4 skip-gram gradient, "
                   "5 sampled message-passing mean, 8 ensemble equivalence");
  c_ck->add_option("--k", ck.k, "power for sections 1-2")->capture_default_str();
  auto* fan_opt = c_ck->add_option("--fanout", ck.fanout,
                                   "fanout (default 3; section 8 defaults to 1)");
  c_ck->add_option("--runs", ck.runs, "Monte-Carlo repetitions")->capture_default_str();
  c_ck->add_option("--dim", ck.dim, "embedding dim for gradient sections")
      ->capture_default_str();
  c_ck->add_option("--window", ck.window, "context window for section 4")
      ->capture_default_str();
  c_ck->add_option("--coeffs", ck.coeffs, "factorization coefficients (section 3)")
      ->delimiter(',')->capture_default_str();
  c_ck->add_option("--alpha", ck.alpha, "regular-graph degree (section 8)")
      ->capture_default_str();
  c_ck->add_option("--n", ck.ens_n, "regular-graph size (section 8)")->capture_default_str();
  c_ck->add_option("--report", ck.report_path, "report path")->capture_default_str();
  c_ck->add_option("--seed", ck.seed, "RNG seed")->capture_default_str();
  c_ck->add_option("--workers", ck.workers, "traversal worker threads")->capture_default_str();
  c_ck->add_option("--manifest", ck.manifest, "manifest path")->capture_default_str();

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen-graph", "write a synthetic edge list");
  c_gen->add_option("--kind", gen.kind, "er | regular | barbell | demo")->required();
  c_gen->add_option("--n", gen.n, "node count");
  c_gen->add_option("--p", gen.p, "edge probability (er)")->capture_default_str();
  c_gen->add_option("--alpha", gen.alpha, "degree (regular)")->capture_default_str();
  c_gen->add_option("--out", gen.out, "edge list path")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  c_gen->add_option("--workers", gen.workers, "accepted for interface parity")
      ->capture_default_str();
  c_gen->add_option("--manifest", gen.manifest, "manifest path")->capture_default_str();

  std::string rerun_manifest;
  auto* c_rr = app.add_subcommand("rerun", "re-execute a command from its manifest");
  c_rr->add_option("--manifest", rerun_manifest, "manifest written by a previous run")
      ->required();

  std::vector<const char*> cargv;
  cargv.push_back("gttf");
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_est->parsed()) return cmd_estimate_tk(est);
    if (c_tr->parsed()) return cmd_train(tr);
    if (c_ev->parsed()) return cmd_eval_linkpred(ev);
    if (c_be->parsed()) return cmd_bench_traverse(be);
    if (c_ck->parsed()) {
      ck.fanout_given = fan_opt->count() > 0;
      return cmd_check(ck);
    }
    if (c_gen->parsed()) return cmd_gen_graph(gen);
    if (c_rr->parsed()) return cmd_rerun(rerun_manifest, depth);
  } catch (const gttf::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, 0);
}
