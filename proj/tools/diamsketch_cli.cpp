// diamsketch: command-line front end for the sketch library and the lab.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diamsketch/afn_sketch.hpp"
#include "diamsketch/diam_sketch.hpp"
#include "diamsketch/linf_embedding.hpp"
#include "diamsketch/lowerbound_lab.hpp"
#include "diamsketch/metric.hpp"
#include "diamsketch/rng.hpp"
#include "diamsketch/stream_io.hpp"
#include "harness.hpp"

using namespace diamsketch;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

/// Writes to `path`, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

FiniteMetric load_metric(const std::string& path) { return harness::load_metric_file(path); }

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoull(item));
  }
  return out;
}

std::string rational_string(const Rational& r) { return r.str(); }

void print_report(std::ostream& out, const GraphPropertiesReport& r) {
  out << "n," << r.n << "\nk," << r.k << "\np," << r.p << "\nedges," << r.edges << "\nistar_size," << r.istar_size
      << "\nmin_neighborhood," << r.min_neighborhood << "\nmax_neighborhood," << r.max_neighborhood
      << "\nmax_common_neighborhood," << r.max_common_neighborhood << "\nempty_neighborhoods_in_istar,"
      << r.empty_neighborhoods_in_istar << "\nistar_large," << r.istar_large << "\nneighborhoods_large,"
      << r.neighborhoods_large << "\noverlaps_small," << r.overlaps_small << "\nistar_neighborhoods_nonempty,"
      << r.istar_neighborhoods_nonempty << '\n';
}

double parse_probability(const std::string& text, std::size_t n, std::size_t k) {
  if (text == "auto") return auto_edge_probability(n, k);
  return std::stod(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turnstile diameter sketches, AFN in l_inf, embeddings and lower-bound lab"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads for multi-trial commands")->check(CLI::PositiveNumber);

  // gen-metric
  auto* gen_metric = app.add_subcommand("gen-metric", "Generate a bipartite instance or a connected graph metric");
  bool bipartite = false;
  std::size_t gm_n = 100;
  std::string gm_p = "auto";
  std::size_t gm_k = 2;
  double gm_extra = 0.02;
  std::uint64_t gm_seed = 1;
  std::string gm_out, gm_csv;
  gen_metric->add_flag("--bipartite", bipartite, "Random bipartite G(n, n, p)");
  gen_metric->add_option("-n", gm_n, "Side size (bipartite) or vertex count")->check(CLI::PositiveNumber);
  gen_metric->add_option("-p", gm_p, "Edge probability or 'auto'");
  gen_metric->add_option("-k", gm_k, "Distance parameter for 'auto' and I*")->check(CLI::PositiveNumber);
  gen_metric->add_option("--extra-p", gm_extra, "Extra edge probability for connected graphs");
  gen_metric->add_option("--seed", gm_seed);
  gen_metric->add_option("--out", gm_out, "Graph file (default stdout)");
  gen_metric->add_option("--csv", gm_csv, "Also write the dense metric CSV");

  // gen-stream
  auto* gen_stream = app.add_subcommand("gen-stream", "Generate a turnstile stream");
  std::size_t gs_n = 128, gs_support = 8, gs_churn = 16;
  std::int64_t gs_mult = 3;
  std::uint64_t gs_seed = 1;
  std::string gs_out;
  gen_stream->add_option("-n", gs_n, "Universe size")->required();
  gen_stream->add_option("--support", gs_support, "Final support size");
  gen_stream->add_option("--max-mult", gs_mult, "Largest final multiplicity");
  gen_stream->add_option("--churn", gs_churn, "Insert/delete pairs that cancel");
  gen_stream->add_option("--seed", gs_seed);
  gen_stream->add_option("--out", gs_out, "Stream file (default stdout)");

  // replay
  auto* replay = app.add_subcommand("replay", "Replay a stream against the exact oracle, the baseline or the sketch");
  std::string rp_metric, rp_stream;
  bool rp_oracle = false, rp_baseline = false;
  double rp_c = 10.0, rp_delta = 0.1;
  std::uint64_t rp_seed = 1;
  replay->add_option("--metric", rp_metric, "Graph file or metric CSV")->required();
  replay->add_option("--stream", rp_stream, "Stream file")->required();
  replay->add_flag("--oracle", rp_oracle, "Print the exact diameter");
  replay->add_flag("--baseline", rp_baseline, "Print the insertion-only baseline");
  replay->add_option("--c", rp_c);
  replay->add_option("--delta", rp_delta);
  replay->add_option("--seed", rp_seed);

  // diam-estimate
  auto* estimate = app.add_subcommand("diam-estimate", "Streaming c-approximate diameter");
  std::string de_metric, de_stream, de_out;
  double de_c = 10.0, de_delta = 0.1, de_oversample = 1.0;
  std::uint64_t de_seed = 1;
  bool de_space = false, de_low_memory = false;
  estimate->add_option("--metric", de_metric, "Graph file or metric CSV")->required();
  estimate->add_option("--stream", de_stream, "Stream file")->required();
  estimate->add_option("--c", de_c, "Approximation factor (q = floor((c-2)/4) >= 2)");
  estimate->add_option("--delta", de_delta, "Failure probability");
  estimate->add_option("--seed", de_seed);
  estimate->add_option("--oversample", de_oversample, "Embedding oversample constant");
  estimate->add_flag("--report-space", de_space, "Print serialized bytes and rows");
  estimate->add_flag("--low-memory", de_low_memory, "Evaluate thresholds one at a time");
  estimate->add_option("--out", de_out, "Per-threshold CSV (default stdout)");

  // afn
  auto* afn = app.add_subcommand("afn", "Approximate furthest neighbor queries in l_inf^k");
  std::string af_points, af_stream, af_queries, af_out;
  double af_r = 1.0, af_eps = 0.5, af_delta = 0.05;
  std::uint64_t af_seed = 1;
  afn->add_option("--points", af_points, "Point file, one point per line")->required();
  afn->add_option("--stream", af_stream, "Stream file")->required();
  afn->add_option("--queries", af_queries, "Query file, one point per line")->required();
  afn->add_option("--r", af_r, "Radius")->required();
  afn->add_option("--eps", af_eps);
  afn->add_option("--delta", af_delta);
  afn->add_option("--seed", af_seed);
  afn->add_option("--out", af_out, "Results CSV (default stdout)");

  // embed
  auto* embed = app.add_subcommand("embed", "Build and verify an l_inf embedding");
  std::string em_metric, em_out, em_anchors;
  unsigned em_q = 2, em_attempts = 3;
  double em_c = LinfEmbedding::kDefaultOversample;
  std::uint64_t em_seed = 1;
  embed->add_option("--metric", em_metric, "Graph file or metric CSV")->required();
  embed->add_option("--q", em_q, "Distortion 2q-1")->check(CLI::PositiveNumber);
  embed->add_option("--c-emb", em_c, "Oversample constant");
  embed->add_option("--attempts", em_attempts, "Verify-and-rebuild attempts")->check(CLI::PositiveNumber);
  embed->add_option("--seed", em_seed);
  embed->add_option("--out", em_out, "Coordinate CSV");
  embed->add_option("--anchors", em_anchors, "Anchor set file");

  // lab
  auto* lab = app.add_subcommand("lab", "Lower-bound lab");
  lab->require_subcommand(1);
  std::string lb_graph, lb_matrix, lb_indices, lb_digraph, lb_vertices;
  std::size_t lb_k = 2, lb_count = 1, lb_n = 100;
  std::string lb_p = "auto";
  std::uint64_t lb_seed = 1;
  std::int64_t lb_P = 1, lb_U = 1'000'000;
  bool lb_nonempty = false;
  auto add_graph_opts = [&](CLI::App* sub) {
    sub->add_option("--graph", lb_graph, "Graph file (else generated from -n, -p, --seed)");
    sub->add_option("-n", lb_n);
    sub->add_option("-p", lb_p);
    sub->add_option("-k", lb_k)->check(CLI::PositiveNumber);
    sub->add_option("--seed", lb_seed);
  };
  auto* lab_props = lab->add_subcommand("properties", "I*, neighborhood and overlap report");
  add_graph_opts(lab_props);
  auto* lab_sample = lab->add_subcommand("sample-hard", "Draw from the hard distribution");
  add_graph_opts(lab_sample);
  lab_sample->add_option("--count", lb_count);
  lab_sample->add_option("--P", lb_P);
  lab_sample->add_option("--U", lb_U);
  lab_sample->add_flag("--nonempty", lb_nonempty, "Draw i only from I* with nonempty N(v_i)");
  auto* lab_minrank = lab->add_subcommand("minrank", "Brute-force F2 minrank (<= 5 vertices)");
  add_graph_opts(lab_minrank);
  lab_minrank->add_option("--vertices", lb_vertices, "Comma-separated I (knowledge graph of --graph)");
  lab_minrank->add_option("--digraph", lb_digraph, "Digraph file: `t`, then `a b` per edge");
  std::size_t mr_cycle = 0, mr_complete = 0, mr_edgeless = 0;
  lab_minrank->add_option("--cycle", mr_cycle, "Directed cycle on t vertices");
  lab_minrank->add_option("--complete", mr_complete, "Complete digraph on t vertices");
  lab_minrank->add_option("--edgeless", mr_edgeless, "Edgeless digraph on t vertices");
  auto* lab_fooling = lab->add_subcommand("fooling", "Search fooling vectors of a sketch matrix");
  add_graph_opts(lab_fooling);
  lab_fooling->add_option("--matrix", lb_matrix, "Matrix file")->required();
  lab_fooling->add_option("--indices", lb_indices, "Comma-separated indices (default I*)");
  auto* lab_dual = lab->add_subcommand("dual", "Build the dual low-rank matrix");
  add_graph_opts(lab_dual);
  lab_dual->add_option("--matrix", lb_matrix, "Matrix file")->required();
  lab_dual->add_option("--indices", lb_indices, "Comma-separated I (default I*)");
  auto* lab_adv = lab->add_subcommand("adversary", "Failure rate of a decider on the hard distribution");
  add_graph_opts(lab_adv);
  std::string adv_decider = "sketch";
  double adv_c = 10.0;
  lab_adv->add_option("--trials", lb_count);
  lab_adv->add_option("--decider", adv_decider)->check(CLI::IsMember({"sketch", "oracle"}));
  lab_adv->add_option("--c", adv_c);

  // tradeoff
  auto* tradeoff = app.add_subcommand("tradeoff", "Space/accuracy across approximation factors");
  std::vector<double> to_c{10, 14, 18};
  std::size_t to_n = 128, to_trials = 50;
  std::uint64_t to_seed = 1;
  std::string to_out, to_config, to_dump;
  tradeoff->add_option("--c", to_c, "Comma-separated factors")->delimiter(',');
  tradeoff->add_option("--n", to_n);
  tradeoff->add_option("--trials", to_trials);
  tradeoff->add_option("--seed", to_seed);
  tradeoff->add_option("--out", to_out, "CSV (default stdout)");
  tradeoff->add_option("--config", to_config, "Load an experiment config (JSON)");
  tradeoff->add_option("--dump-config", to_dump, "Write the effective config (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_metric) {
      const std::uint64_t seed = harness::resolve_seed(gm_seed);
      if (bipartite) {
        const BipartiteGraphInstance g = gen_bipartite(gm_n, parse_probability(gm_p, gm_n, gm_k), seed);
        {
          Output out(gm_out);
          write_graph_file(out.get(), g);
        }
        if (!gm_csv.empty()) {
          Output csv(gm_csv);
          write_metric_csv(csv.get(), shortest_path_metric(g));
        }
        print_report(gm_out.empty() ? std::cerr : std::cout, verify_graph_properties(g, gm_k));
      } else {
        const FiniteMetric m = FiniteMetric::from_graph(gen_connected_graph(gm_n, gm_extra, seed));
        Output out(gm_csv.empty() ? gm_out : gm_csv);
        write_metric_csv(out.get(), m);
      }
      return 0;
    }

    if (*gen_stream) {
      const std::uint64_t seed = harness::resolve_seed(gs_seed);
      const FrequencyVector x = random_support_vector(gs_n, gs_support, gs_mult, seed);
      Output out(gs_out);
      write_stream(out.get(), generate_stream(x, gs_churn, seed));
      return 0;
    }

    if (*replay) {
      const FiniteMetric metric = load_metric(rp_metric);
      auto in = open_in(rp_stream);
      const auto stream = read_stream(in, metric.size());
      const FrequencyVector x = apply_stream(metric.size(), stream);
      if (rp_oracle) {
        const auto d = diam_oracle(metric, x.entries());
        if (!d) {
          std::cout << "diameter,*\n";
          return 0;
        }
        std::cout << "diameter," << *d << '\n';
      }
      if (rp_baseline) {
        const double b = insertion_only_baseline(metric, stream);
        std::cout << "baseline," << b << '\n';
      }
      if (!rp_oracle && !rp_baseline) {
        EstimatorConfig cfg;
        cfg.c = rp_c;
        cfg.delta = rp_delta;
        cfg.seed = harness::resolve_seed(rp_seed);
        const EstimatorContext ctx = EstimatorContext::build(metric, cfg);
        std::cout << "eta," << estimate_by_replay(ctx, x.entries(), true).eta << '\n';
      }
      return 0;
    }

    if (*estimate) {
      const FiniteMetric metric = load_metric(de_metric);
      auto in = open_in(de_stream);
      const auto stream = read_stream(in, metric.size());
      EstimatorConfig cfg;
      cfg.c = de_c;
      cfg.delta = de_delta;
      cfg.seed = harness::resolve_seed(de_seed);
      cfg.oversample = de_oversample;
      auto ctx = std::make_shared<const EstimatorContext>(EstimatorContext::build(metric, cfg));
      EstimateResult res;
      SpaceReport space;
      if (de_low_memory) {
        const FrequencyVector x = apply_stream(metric.size(), stream);
        res = estimate_by_replay(*ctx, x.entries());
        if (de_space) space = plan_space(*ctx);
      } else {
        DiamEstimator est(ctx);
        for (const auto& u : stream) est.update(u.index, u.delta);
        res = est.estimate();
        if (de_space) space = est.space();
      }
      std::cout << "eta," << res.eta << '\n';
      if (!ctx->distortion.ok())
        std::cerr << "warning: embedding failed verification after " << ctx->embedding_attempts << " attempts\n";
      Output out(de_out);
      out.get() << "threshold,embedded_radius,answer,query,witness\n";
      for (const auto& d : res.decisions) {
        out.get() << d.threshold << ',' << d.embedded << ',' << (d.far ? "Far" : "Close") << ',';
        if (d.query) out.get() << *d.query;
        out.get() << ',';
        if (d.witness) out.get() << d.witness->index;
        out.get() << '\n';
      }
      if (de_space) {
        std::cout << "q," << ctx->plan.q << "\nepsilon," << ctx->plan.epsilon << "\nembedding_dimension,"
                  << space.embedding_dimension << "\ngrid," << space.grid_size << "\ntotal_rows," << space.total_rows
                  << "\ntotal_bytes," << space.total_bytes << '\n';
        for (const auto& e : space.entries) std::cout << e.name << ',' << e.rows << ',' << e.bytes << '\n';
      }
      return 0;
    }

    if (*afn) {
      auto pin = open_in(af_points);
      auto universe = std::make_shared<const PointUniverse>(PointUniverse::read(pin));
      auto sin = open_in(af_stream);
      const auto stream = read_stream(sin, universe->size());
      auto qin = open_in(af_queries);
      const PointUniverse queries = PointUniverse::read(qin);
      if (queries.dim() != universe->dim()) throw std::runtime_error("query dimension differs from the points");
      AfnParams params;
      params.r = af_r;
      params.epsilon = af_eps;
      params.delta = af_delta;
      params.seed = harness::resolve_seed(af_seed);
      AfnSketch sketch(universe, params);
      for (const auto& u : stream) sketch.update(u.index, u.delta);
      std::vector<TrialRow> rows;
      for (std::size_t t = 0; t < queries.size(); ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        const AfnAnswer a = sketch.query(queries.point(t));
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        TrialRow row{t, a.far ? "Far" : "Close", std::nullopt, ms};
        if (a.witness) row.witness = a.witness->index;
        rows.push_back(row);
      }
      Output out(af_out);
      write_results_csv(out.get(), rows);
      return 0;
    }

    if (*embed) {
      const FiniteMetric metric = load_metric(em_metric);
      const VerifiedEmbedding v = build_verified_embedding(metric, em_q, harness::resolve_seed(em_seed), em_c, em_attempts);
      std::cout << "dimension," << v.embedding.dimension() << "\nattempts," << v.attempts << "\nmax_expansion,"
                << v.report.max_expansion << "\nmax_contraction," << v.report.max_contraction
                << "\nupper_violations," << v.report.upper_violations << "\nlower_violations,"
                << v.report.lower_violations << "\nverified," << v.report.ok() << '\n';
      if (!em_out.empty()) {
        Output out(em_out);
        v.embedding.write_csv(out.get());
      }
      if (!em_anchors.empty()) {
        Output out(em_anchors);
        v.embedding.write_anchors(out.get());
      }
      return v.report.ok() ? 0 : 2;
    }

    if (*lab) {
      const std::uint64_t seed = harness::resolve_seed(lb_seed);
      auto graph = [&]() {
        if (!lb_graph.empty()) {
          auto in = open_in(lb_graph);
          return read_graph_file(in);
        }
        return gen_bipartite(lb_n, parse_probability(lb_p, lb_n, lb_k), seed);
      };
      if (*lab_props) {
        print_report(std::cout, verify_graph_properties(graph(), lb_k));
        return 0;
      }
      if (*lab_sample) {
        const auto g = graph();
        std::cout << "sample,i,x_i,support,index_determines_diam\n";
        for (std::size_t s = 0; s < lb_count; ++s) {
          const std::uint64_t ss = derive_seed(seed, 0x5a3e1ULL, s);
          const HardSample h =
              lb_nonempty ? sample_hard_nonempty(g, lb_k, lb_P, lb_U, ss) : sample_hard(g, lb_k, lb_P, lb_U, ss);
          std::size_t support = 0;
          for (auto v : h.x) support += v != 0;
          std::cout << s << ',' << h.i << ',' << h.x[h.i] << ',' << support << ','
                    << (lb_k >= 2 ? (check_index_determines_diam(g, h, lb_k) ? "true" : "false") : "n/a") << '\n';
        }
        return 0;
      }
      if (*lab_minrank) {
        KnowledgeGraph kg = [&] {
          std::vector<std::pair<std::size_t, std::size_t>> edges;
          if (mr_cycle) {
            for (std::size_t a = 0; a < mr_cycle; ++a) edges.emplace_back(a, (a + 1) % mr_cycle);
            return KnowledgeGraph::from_edges(mr_cycle, edges);
          }
          if (mr_complete) {
            for (std::size_t a = 0; a < mr_complete; ++a)
              for (std::size_t b = 0; b < mr_complete; ++b)
                if (a != b) edges.emplace_back(a, b);
            return KnowledgeGraph::from_edges(mr_complete, edges);
          }
          if (mr_edgeless) return KnowledgeGraph::from_edges(mr_edgeless, edges);
          if (!lb_digraph.empty()) {
            auto in = open_in(lb_digraph);
            std::size_t t = 0;
            if (!(in >> t)) throw std::runtime_error("digraph: missing vertex count");
            std::size_t a = 0, b = 0;
            while (in >> a >> b) edges.emplace_back(a, b);
            return KnowledgeGraph::from_edges(t, edges);
          }
          return KnowledgeGraph::from_instance(graph(), parse_index_list(lb_vertices));
        }();
        std::cout << "vertices," << kg.size() << "\nedges," << kg.edge_count() << "\nminrank_f2,"
                  << minrank_bruteforce_f2(kg) << '\n';
        return 0;
      }
      if (*lab_fooling || *lab_dual) {
        const auto g = graph();
        auto min = open_in(lb_matrix);
        const IntegerSketchMatrix t = IntegerSketchMatrix::read(min);
        const std::vector<std::size_t> idx = lb_indices.empty() ? istar(g, lb_k) : parse_index_list(lb_indices);
        if (*lab_fooling) {
          std::cout << "index,fooling_vector\n";
          for (std::size_t i : idx) {
            std::cout << i << ',';
            if (auto z = fooling_vector_exists(t, g, i)) {
              for (std::size_t j = 0; j < z->size(); ++j) std::cout << (j ? " " : "") << rational_string((*z)[j]);
            } else {
              std::cout << "none";
            }
            std::cout << '\n';
          }
          return 0;
        }
        try {
          const DualMatrix m = build_dual_matrix(t, g, idx);
          for (std::size_t i = 0; i < m.n; ++i) {
            for (std::size_t j = 0; j < m.n; ++j) std::cout << (j ? "," : "") << m.at(i, j);
            std::cout << '\n';
          }
        } catch (const FoolingVectorError& e) {
          std::cerr << e.what() << "; witness:";
          for (const auto& v : e.witness()) std::cerr << ' ' << rational_string(v);
          std::cerr << '\n';
          return 3;
        }
        return 0;
      }
      if (*lab_adv) {
        AdversaryConfig cfg;
        cfg.decider = adv_decider == "oracle" ? AdversaryDecider::kOracle : AdversaryDecider::kSketch;
        cfg.estimator.c = adv_c;
        cfg.estimator.seed = seed;
        const AdversaryResult r = adversary_eval(cfg, graph(), lb_k, lb_count, seed);
        std::cout << "decider,trials,failures,rate\n"
                  << adv_decider << ',' << r.trials << ',' << r.failures << ',' << r.rate() << '\n';
        return 0;
      }
    }

    if (*tradeoff) {
      harness::ExperimentConfig cfg;
      if (!to_config.empty()) {
        auto in = open_in(to_config);
        cfg = nlohmann::json::parse(in).get<harness::ExperimentConfig>();
      } else {
        cfg.command = "tradeoff";
        cfg.sketch.c_values = to_c;
        cfg.instance.n = to_n;
        cfg.trials = to_trials;
        cfg.seed = to_seed;
        cfg.output = to_out;
      }
      cfg.seed = harness::resolve_seed(cfg.seed);
      if (app.get_option("--threads")->count() > 0) cfg.threads = threads;
      if (!to_dump.empty()) {
        Output dump(to_dump);
        dump.get() << nlohmann::json(cfg).dump(2) << '\n';
      }
      Output out(cfg.output);
      return harness::run(cfg, out.get());
    }
  } catch (const StreamParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
