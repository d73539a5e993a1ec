// manifold_id: intrinsic-dimension analysis driver.
//
// Subcommands cover the full workflow (preprocess -> fit -> postprocess ->
// spatial -> report), each reading only documented artifacts of earlier
// stages, plus `synth` for generating ground-truth test data and `all` to run
// the chain end to end. Every command is deterministic under
// (inputs, config, seed): artifacts contain no timestamps or absolute paths,
// and all numbers go through one shortest-round-trip formatter.
//
// Exit codes: 0 success, 1 usage/config error, 2 data/domain error.

#include <cxxabi.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mid/artifacts.hpp"
#include "mid/errors.hpp"
#include "mid/hidalgo.hpp"
#include "mid/io.hpp"
#include "mid/pipeline.hpp"
#include "mid/posterior.hpp"
#include "mid/rng.hpp"
#include "mid/spatial.hpp"
#include "mid/synthkit.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mid;

namespace {

struct RunConfig {
    fs::path out = "run";
    std::uint64_t seed = 0;
    std::string stage = "full";   // "full" or "1".."4"

    // preprocess
    std::vector<std::pair<std::string, fs::path>> variables;   // name -> wide CSV
    fs::path metadata;
    std::string start = "2020-03-01";
    std::string end = "2021-05-29";
    double missing_threshold = 0.20;
    double min_population = 1'000'000.0;

    // fit (seed filled from the top-level seed at run time)
    hidalgo::HidalgoConfig fit;

    // posterior
    double ci_level = 0.90;

    // spatial
    fs::path adjacency;   // empty: fall back to metadata centroids
    int knn_k = 5;
    int n_perm = 9999;
};

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigInvalid(what + " does not exist: " + p.string());
}

RunConfig load_config(const fs::path& path) {
    require_file(path, "config file");
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigInvalid(path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    RunConfig cfg;
    try {
        if (j.contains("out")) cfg.out = resolve(j["out"]);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.stage = j.value("stage", cfg.stage);
        if (j.contains("preprocess")) {
            const json& p = j["preprocess"];
            for (const auto& v : p.value("variables", json::array()))
                cfg.variables.emplace_back(v.at("name"), resolve(v.at("path")));
            if (p.contains("metadata")) cfg.metadata = resolve(p["metadata"]);
            cfg.start = p.value("start", cfg.start);
            cfg.end = p.value("end", cfg.end);
            cfg.missing_threshold = p.value("missing_threshold", cfg.missing_threshold);
            cfg.min_population = p.value("min_population", cfg.min_population);
        }
        if (j.contains("fit")) {
            const json& f = j["fit"];
            cfg.fit.L = f.value("L", cfg.fit.L);
            cfg.fit.alpha = f.value("alpha", cfg.fit.alpha);
            cfg.fit.a_d = f.value("a_d", cfg.fit.a_d);
            cfg.fit.b_d = f.value("b_d", cfg.fit.b_d);
            cfg.fit.zeta = f.value("zeta", cfg.fit.zeta);
            cfg.fit.q = f.value("q", cfg.fit.q);
            cfg.fit.nsim = f.value("nsim", cfg.fit.nsim);
            cfg.fit.burnin = f.value("burnin", cfg.fit.burnin);
            cfg.fit.d_max = f.value("d_max", cfg.fit.d_max);
        }
        if (j.contains("posterior")) cfg.ci_level = j["posterior"].value("ci_level", cfg.ci_level);
        if (j.contains("spatial")) {
            const json& s = j["spatial"];
            if (s.contains("adjacency")) cfg.adjacency = resolve(s["adjacency"]);
            cfg.knn_k = s.value("knn_k", cfg.knn_k);
            cfg.n_perm = s.value("n_perm", cfg.n_perm);
        }
    } catch (const json::exception& e) {
        throw ConfigInvalid(path.string() + ": " + e.what());
    }
    return cfg;
}

void validate_config(const RunConfig& cfg, bool needs_input) {
    if (cfg.stage != "full" && (cfg.stage.size() != 1 || cfg.stage[0] < '1' || cfg.stage[0] > '4'))
        throw ConfigInvalid("stage must be one of 1, 2, 3, 4, full");
    if (needs_input) {
        if (cfg.variables.empty())
            throw ConfigInvalid("preprocess.variables must list at least one input CSV");
        if (cfg.metadata.empty()) throw ConfigInvalid("preprocess.metadata is required");
        for (const auto& [name, path] : cfg.variables)
            require_file(path, "variable '" + name + "' CSV");
        require_file(cfg.metadata, "metadata CSV");
    }
    if (!cfg.adjacency.empty()) require_file(cfg.adjacency, "adjacency CSV");
}

// ---------------------------------------------------------------- preprocess

void cmd_preprocess(const RunConfig& cfg) {
    pipeline::Panel panel = pipeline::load_panel(cfg.variables, cfg.metadata,
                                                 pipeline::parse_date(cfg.start),
                                                 pipeline::parse_date(cfg.end));
    if (cfg.stage != "full") {
        const auto& w = pipeline::stage_windows()[cfg.stage[0] - '1'];
        panel = pipeline::truncate_dates(panel, w.start, w.end);
    }
    panel = pipeline::filter_missing(panel, cfg.missing_threshold);
    panel = pipeline::impute_linear(panel);
    panel = pipeline::filter_population(panel, cfg.min_population);
    panel = pipeline::zscore_panel(panel);

    std::vector<std::string> order;
    for (const auto& [name, path] : cfg.variables) order.push_back(name);
    geometry::DataMatrix matrix = pipeline::assemble_matrix(panel, order);

    const fs::path dir = cfg.out / "preprocess";
    artifacts::write_panel(dir, panel);
    artifacts::write_provenance_json(dir / "provenance.json", panel);
    artifacts::write_matrix_csv(dir / "matrix.csv", matrix);
}

// ----------------------------------------------------------------------- fit

geometry::DataMatrix load_matrix(const RunConfig& cfg) {
    const fs::path path = cfg.out / "preprocess" / "matrix.csv";
    if (!fs::exists(path)) throw MissingArtifact("preprocess");
    auto matrix = artifacts::read_matrix_csv(path);
    matrix.validate();
    return matrix;
}

void cmd_fit(const RunConfig& cfg) {
    geometry::DataMatrix matrix = load_matrix(cfg);
    hidalgo::HidalgoConfig fit_cfg = cfg.fit;
    fit_cfg.seed = Rng::derive(cfg.seed, "fit");
    hidalgo::McmcTraces traces = hidalgo::hidalgo_fit(matrix, fit_cfg);
    artifacts::write_traces(cfg.out / "fit", traces);
}

// --------------------------------------------------------------- postprocess

void cmd_postprocess(const RunConfig& cfg) {
    geometry::DataMatrix matrix = load_matrix(cfg);
    hidalgo::McmcTraces traces = artifacts::read_traces(cfg.out / "fit");
    if (traces.n() != matrix.n())
        throw DimensionMismatch("traces cover " + std::to_string(traces.n()) +
                                " observations but the matrix has " +
                                std::to_string(matrix.n()) + " rows");

    posterior::CoClusteringMatrix pcm = posterior::co_clustering(traces);
    posterior::Partition partition = posterior::vi_partition_from_traces(pcm, traces);
    posterior::ObservationIdChains chains = posterior::remap_observation_chains(traces);
    auto summaries = posterior::cluster_id_summary(partition, chains, traces, cfg.ci_level);

    const fs::path dir = cfg.out / "postprocess";
    fs::create_directories(dir);
    artifacts::write_pcm_csv(dir / "pcm.csv", pcm, matrix.row_ids);
    artifacts::write_partition_json(dir / "partition.json", partition, matrix.row_ids);
    artifacts::write_median_ids_csv(dir / "median_ids.csv", matrix.row_ids, chains.medians,
                                    partition.labels);
    artifacts::write_cluster_summaries_json(dir / "cluster_summaries.json", summaries);

    // plot-ready posterior ID samples, thinned to ~100 draws per observation
    const int stride = std::max(1, traces.nsim() / 100);
    std::vector<std::vector<std::string>> rows;
    for (int k = 1; k <= partition.K; ++k) {
        for (int i = 0; i < traces.n(); ++i) {
            if (partition.labels[i] != k) continue;
            for (int t = 0; t < traces.nsim(); t += stride)
                rows.push_back({std::to_string(k), io::fmt_double(chains.chains(t, i))});
        }
    }
    io::write_csv(dir / "id_density.csv", {"cluster", "id"}, rows);
}

// ------------------------------------------------------------------- spatial

bool metadata_has_centroids(const RunConfig& cfg) {
    if (cfg.metadata.empty() || !fs::exists(cfg.metadata)) return false;
    io::Csv meta = io::read_csv(cfg.metadata);
    bool lat = false, lon = false;
    for (const auto& h : meta.header) {
        lat |= h == "lat";
        lon |= h == "lon";
    }
    return lat && lon;
}

spatial::SpatialWeights resolve_weights(const RunConfig& cfg,
                                        const std::vector<std::string>& ids) {
    if (!cfg.adjacency.empty()) return artifacts::load_adjacency_csv(cfg.adjacency, ids);
    if (!metadata_has_centroids(cfg))
        throw ConfigInvalid(
            "spatial weights need either spatial.adjacency or lat/lon columns "
            "in the metadata CSV");
    io::Csv meta = io::read_csv(cfg.metadata);
    int id_col = -1, lat_col = -1, lon_col = -1;
    for (std::size_t c = 0; c < meta.header.size(); ++c) {
        if (meta.header[c] == "id") id_col = static_cast<int>(c);
        if (meta.header[c] == "lat") lat_col = static_cast<int>(c);
        if (meta.header[c] == "lon") lon_col = static_cast<int>(c);
    }
    std::map<std::string, std::pair<double, double>> centroids;
    for (const auto& row : meta.rows)
        centroids[row[id_col]] = {io::parse_double(row[lat_col], "metadata lat"),
                                  io::parse_double(row[lon_col], "metadata lon")};
    std::vector<std::pair<double, double>> points;
    for (const auto& id : ids) {
        auto it = centroids.find(id);
        if (it == centroids.end())
            throw ParseError("metadata has no centroid for country " + id);
        points.push_back(it->second);
    }
    return spatial::build_knn_weights(points, std::min<int>(cfg.knn_k, static_cast<int>(ids.size()) - 1), ids);
}

void cmd_spatial(const RunConfig& cfg) {
    std::vector<std::string> ids;
    std::vector<double> medians;
    std::vector<int> clusters;
    artifacts::read_median_ids_csv(cfg.out / "postprocess" / "median_ids.csv", ids, medians,
                                   clusters);

    spatial::SpatialWeights weights = resolve_weights(cfg, ids);
    spatial::MoranResult moran = spatial::moran_permutation_test(
        medians, weights, cfg.n_perm, Rng::derive(cfg.seed, "spatial"));

    // between-cluster comparisons of the median-ID distributions
    std::vector<std::pair<std::string, std::pair<double, double>>> ks;
    int K = 0;
    for (int c : clusters) K = std::max(K, c);
    for (int a = 1; a <= K; ++a) {
        for (int b = a + 1; b <= K; ++b) {
            std::vector<double> sa, sb;
            for (std::size_t i = 0; i < medians.size(); ++i) {
                if (clusters[i] == a) sa.push_back(medians[i]);
                if (clusters[i] == b) sb.push_back(medians[i]);
            }
            if (sa.empty() || sb.empty()) continue;
            ks.emplace_back("median_id:c" + std::to_string(a) + "_vs_c" + std::to_string(b),
                            spatial::ks_two_sample(sa, sb));
        }
    }

    fs::create_directories(cfg.out / "spatial");
    artifacts::write_moran_json(cfg.out / "spatial" / "spatial.json", moran, ks);
}

// -------------------------------------------------------------------- report

const char* kReportSchema = R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "manifold_id run report",
  "type": "object",
  "required": ["stage", "countries", "clusters"],
  "properties": {
    "stage": {"type": "string"},
    "countries": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["id", "median_id", "cluster"],
        "properties": {
          "id": {"type": "string"},
          "median_id": {"type": "number"},
          "cluster": {"type": "integer", "minimum": 1}
        }
      }
    },
    "clusters": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["cluster", "size", "mean", "median", "ci_low", "ci_high"],
        "properties": {
          "cluster": {"type": "integer"},
          "size": {"type": "integer"},
          "mean": {"type": "number"},
          "median": {"type": "number"},
          "ci_low": {"type": "number"},
          "ci_high": {"type": "number"},
          "component_mean": {"type": "number"},
          "component_median": {"type": "number"}
        }
      }
    },
    "moran": {
      "type": ["object", "null"],
      "required": ["I", "p_value", "n_perm"]
    }
  }
})";

void cmd_report(const RunConfig& cfg) {
    const fs::path pre = cfg.out / "preprocess";
    const fs::path post = cfg.out / "postprocess";
    if (!fs::exists(pre / "matrix.csv")) throw MissingArtifact("preprocess");
    if (!fs::exists(post / "median_ids.csv")) throw MissingArtifact("postprocess");

    std::vector<std::string> ids;
    std::vector<double> medians;
    std::vector<int> clusters;
    artifacts::read_median_ids_csv(post / "median_ids.csv", ids, medians, clusters);
    json summaries = json::parse(io::read_file(post / "cluster_summaries.json"));

    json report;
    report["stage"] = cfg.stage;
    report["countries"] = json::array();
    for (std::size_t i = 0; i < ids.size(); ++i)
        report["countries"].push_back(
            {{"id", ids[i]}, {"median_id", medians[i]}, {"cluster", clusters[i]}});
    report["clusters"] = summaries["clusters"];
    if (fs::exists(cfg.out / "spatial" / "spatial.json"))
        report["moran"] = json::parse(io::read_file(cfg.out / "spatial" / "spatial.json"))["moran"];
    else
        report["moran"] = nullptr;

    // per-cluster mean/sd trajectory of each standardised variable
    int K = 0;
    for (int c : clusters) K = std::max(K, c);
    std::map<std::string, int> cluster_of;
    for (std::size_t i = 0; i < ids.size(); ++i) cluster_of[ids[i]] = clusters[i];

    std::vector<std::vector<std::string>> rows;
    for (const auto& [name, path] : cfg.variables) {
        const fs::path processed = pre / ("processed_" + name + ".csv");
        if (!fs::exists(processed)) throw MissingArtifact("preprocess");
        io::Csv csv = io::read_csv(processed);
        for (int k = 1; k <= K; ++k) {
            std::vector<int> member_cols;
            for (std::size_t c = 1; c < csv.header.size(); ++c) {
                auto it = cluster_of.find(csv.header[c]);
                if (it != cluster_of.end() && it->second == k)
                    member_cols.push_back(static_cast<int>(c));
            }
            for (const auto& row : csv.rows) {
                double sum = 0.0, sq = 0.0;
                for (int c : member_cols) {
                    double v = io::parse_double(row[c], processed.string());
                    sum += v;
                    sq += v * v;
                }
                const double m = member_cols.empty() ? 0.0 : sum / member_cols.size();
                const double var = member_cols.size() > 1
                                       ? (sq - sum * m) / (member_cols.size() - 1)
                                       : 0.0;
                rows.push_back({std::to_string(k), name, row[0], io::fmt_double(m),
                                io::fmt_double(std::sqrt(std::max(0.0, var)))});
            }
        }
    }

    const fs::path dir = cfg.out / "report";
    fs::create_directories(dir);
    io::write_file(dir / "report.json", report.dump(2) + "\n");
    io::write_csv(dir / "trajectories.csv", {"cluster", "variable", "date", "mean", "sd"}, rows);
    io::write_file(dir / "report_schema.json", std::string(kReportSchema) + "\n");
}

// --------------------------------------------------------------------- synth

struct SynthOptions {
    std::vector<int> d_true;
    std::vector<int> n;
    int embed_D = 10;
    double separation = 0.0;
    std::string kind = "hypercube";
    std::uint64_t seed = 0;
    fs::path out = "synth";
};

void cmd_synth(const SynthOptions& opt) {
    if (opt.d_true.empty()) throw ConfigInvalid("at least one --d is required");
    if (opt.d_true.size() != opt.n.size())
        throw ConfigInvalid("--d and --n must be given the same number of times");
    synthkit::ManifoldKind kind;
    if (opt.kind == "hypercube")
        kind = synthkit::ManifoldKind::UniformHypercube;
    else if (opt.kind == "gaussian")
        kind = synthkit::ManifoldKind::IsotropicGaussian;
    else
        throw ConfigInvalid("--kind must be hypercube or gaussian");

    std::vector<synthkit::ManifoldSpec> specs;
    for (std::size_t g = 0; g < opt.d_true.size(); ++g) {
        synthkit::ManifoldSpec spec;
        spec.kind = kind;
        spec.d_true = opt.d_true[g];
        spec.n = opt.n[g];
        spec.embed_D = opt.embed_D;
        spec.seed = Rng::derive(opt.seed, "synth" + std::to_string(g));
        specs.push_back(spec);
    }
    synthkit::LabeledData data = synthkit::mix_manifolds(specs, opt.separation);

    fs::create_directories(opt.out);
    artifacts::write_matrix_csv(opt.out / "matrix.csv", data.data);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        rows.push_back({data.data.row_ids[i], std::to_string(data.labels[i])});
    io::write_csv(opt.out / "true_labels.csv", {"id", "label"}, rows);
}

// ----------------------------------------------------------------------- all

void cmd_all(const RunConfig& cfg) {
    cmd_preprocess(cfg);
    cmd_fit(cfg);
    cmd_postprocess(cfg);
    if (!cfg.adjacency.empty() || metadata_has_centroids(cfg)) cmd_spatial(cfg);
    cmd_report(cfg);
}

std::string error_name(const Error& e) {
    int status = 0;
    char* demangled = abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status);
    std::string name = status == 0 && demangled ? demangled : typeid(e).name();
    std::free(demangled);
    if (name.rfind("mid::", 0) == 0) name = name.substr(5);
    return name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous intrinsic-dimension analysis of panel data"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> out_flag, stage_flag;
    std::optional<int> nsim_flag, burnin_flag, L_flag, q_flag;
    std::optional<double> alpha_flag, zeta_flag;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON");
        cmd->add_option("--seed", seed_flag, "top-level seed (overrides config)");
        cmd->add_option("--out", out_flag, "output directory (overrides config)");
        cmd->add_option("--stage", stage_flag, "analysis window: 1, 2, 3, 4 or full");
        cmd->add_option("--nsim", nsim_flag, "retained MCMC iterations");
        cmd->add_option("--burnin", burnin_flag, "discarded MCMC iterations");
        cmd->add_option("--L", L_flag, "maximum mixture components");
        cmd->add_option("--alpha", alpha_flag, "Dirichlet concentration");
        cmd->add_option("--zeta", zeta_flag, "neighbour agreement probability");
        cmd->add_option("--q", q_flag, "neighbourhood size");
    };

    CLI::App* preprocess = app.add_subcommand("preprocess", "load, filter, impute, standardise, assemble");
    CLI::App* fit = app.add_subcommand("fit", "run the Gibbs sampler on the assembled matrix");
    CLI::App* postprocess = app.add_subcommand("postprocess", "PCM, VI partition, median IDs, summaries");
    CLI::App* spatial_cmd = app.add_subcommand("spatial", "Moran's I and between-cluster KS tests");
    CLI::App* report = app.add_subcommand("report", "consolidated JSON report and plot-ready CSVs");
    CLI::App* all = app.add_subcommand("all", "full workflow in one invocation");
    for (CLI::App* cmd : {preprocess, fit, postprocess, spatial_cmd, report, all})
        add_common(cmd);

    SynthOptions synth_opt;
    CLI::App* synth = app.add_subcommand("synth", "generate ground-truth manifold samples");
    synth->add_option("--d", synth_opt.d_true, "intrinsic dimension (repeat per group)");
    synth->add_option("--n", synth_opt.n, "points per group (repeat per group)");
    synth->add_option("--embed-D", synth_opt.embed_D, "ambient dimension");
    synth->add_option("--separation", synth_opt.separation, "offset between groups on the first axis");
    synth->add_option("--kind", synth_opt.kind, "hypercube or gaussian");
    synth->add_option("--seed", synth_opt.seed, "seed");
    synth->add_option("--out", synth_opt.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            cmd_synth(synth_opt);
            return 0;
        }

        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (out_flag) cfg.out = *out_flag;
        if (stage_flag) cfg.stage = *stage_flag;
        if (nsim_flag) cfg.fit.nsim = *nsim_flag;
        if (burnin_flag) cfg.fit.burnin = *burnin_flag;
        if (L_flag) cfg.fit.L = *L_flag;
        if (alpha_flag) cfg.fit.alpha = *alpha_flag;
        if (zeta_flag) cfg.fit.zeta = *zeta_flag;
        if (q_flag) cfg.fit.q = *q_flag;

        const bool needs_input = preprocess->parsed() || all->parsed();
        validate_config(cfg, needs_input);

        if (preprocess->parsed()) cmd_preprocess(cfg);
        else if (fit->parsed()) cmd_fit(cfg);
        else if (postprocess->parsed()) cmd_postprocess(cfg);
        else if (spatial_cmd->parsed()) cmd_spatial(cfg);
        else if (report->parsed()) cmd_report(cfg);
        else if (all->parsed()) cmd_all(cfg);
        return 0;
    } catch (const ConfigInvalid& e) {
        std::cerr << json{{"error", "ConfigInvalid"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << json{{"error", error_name(e)}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Unexpected"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
}
