#include "mid/artifacts.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "mid/io.hpp"

namespace mid::artifacts {

using nlohmann::json;

namespace {

json config_to_json(const hidalgo::HidalgoConfig& cfg) {
    return json{{"L", cfg.L},        {"alpha", cfg.alpha},   {"a_d", cfg.a_d},
                {"b_d", cfg.b_d},    {"zeta", cfg.zeta},     {"q", cfg.q},
                {"nsim", cfg.nsim},  {"burnin", cfg.burnin}, {"seed", cfg.seed},
                {"d_max", cfg.d_max}};
}

hidalgo::HidalgoConfig config_from_json(const json& j) {
    hidalgo::HidalgoConfig cfg;
    cfg.L = j.at("L");
    cfg.alpha = j.at("alpha");
    cfg.a_d = j.at("a_d");
    cfg.b_d = j.at("b_d");
    cfg.zeta = j.at("zeta");
    cfg.q = j.at("q");
    cfg.nsim = j.at("nsim");
    cfg.burnin = j.at("burnin");
    cfg.seed = j.at("seed");
    cfg.d_max = j.at("d_max");
    return cfg;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    io::write_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
    return json::parse(io::read_file(path));
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const geometry::DataMatrix& data) {
    std::vector<std::string> header{"id"};
    for (Eigen::Index c = 0; c < data.dim(); ++c) header.push_back("c" + std::to_string(c));
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        std::vector<std::string> row{data.row_ids[i]};
        for (Eigen::Index c = 0; c < data.dim(); ++c)
            row.push_back(io::fmt_double(data.values(i, c)));
        rows.push_back(std::move(row));
    }
    io::write_csv(path, header, rows);
}

geometry::DataMatrix read_matrix_csv(const std::filesystem::path& path) {
    io::Csv csv = io::read_csv(path);
    geometry::DataMatrix out;
    const std::size_t D = csv.header.size() - 1;
    out.values.resize(csv.rows.size(), D);
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        out.row_ids.push_back(csv.rows[i][0]);
        for (std::size_t c = 0; c < D; ++c)
            out.values(i, c) = io::parse_double(csv.rows[i][c + 1], path.string());
    }
    return out;
}

void write_traces(const std::filesystem::path& dir, const hidalgo::McmcTraces& traces) {
    std::filesystem::create_directories(dir);

    std::vector<std::string> obs_header, comp_header;
    for (int i = 0; i < traces.n(); ++i) obs_header.push_back("obs" + std::to_string(i));
    for (int l = 0; l < traces.L(); ++l) comp_header.push_back("comp" + std::to_string(l + 1));

    std::vector<std::vector<std::string>> rows;
    rows.reserve(traces.nsim());
    for (int t = 0; t < traces.nsim(); ++t) {
        std::vector<std::string> row(traces.n());
        for (int i = 0; i < traces.n(); ++i) row[i] = std::to_string(traces.labels(t, i));
        rows.push_back(std::move(row));
    }
    io::write_csv(dir / "labels.csv", obs_header, rows);

    rows.clear();
    for (int t = 0; t < traces.nsim(); ++t) {
        std::vector<std::string> row(traces.L());
        for (int l = 0; l < traces.L(); ++l) row[l] = io::fmt_double(traces.weights(t, l));
        rows.push_back(std::move(row));
    }
    io::write_csv(dir / "weights.csv", comp_header, rows);

    rows.clear();
    for (int t = 0; t < traces.nsim(); ++t) {
        std::vector<std::string> row(traces.L());
        for (int l = 0; l < traces.L(); ++l) row[l] = io::fmt_double(traces.ids(t, l));
        rows.push_back(std::move(row));
    }
    io::write_csv(dir / "ids.csv", comp_header, rows);

    write_json_file(dir / "fit_config.json", config_to_json(traces.config_echo));
}

hidalgo::McmcTraces read_traces(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "labels.csv")) throw MissingArtifact("fit");
    io::Csv labels = io::read_csv(dir / "labels.csv");
    io::Csv weights = io::read_csv(dir / "weights.csv");
    io::Csv ids = io::read_csv(dir / "ids.csv");

    hidalgo::McmcTraces traces;
    traces.config_echo = config_from_json(read_json_file(dir / "fit_config.json"));
    const int nsim = static_cast<int>(labels.rows.size());
    const int n = static_cast<int>(labels.header.size());
    const int L = static_cast<int>(ids.header.size());
    traces.labels.resize(nsim, n);
    traces.weights.resize(nsim, L);
    traces.ids.resize(nsim, L);
    for (int t = 0; t < nsim; ++t) {
        for (int i = 0; i < n; ++i)
            traces.labels(t, i) = static_cast<int>(
                io::parse_double(labels.rows[t][i], "labels.csv"));
        for (int l = 0; l < L; ++l) {
            traces.weights(t, l) = io::parse_double(weights.rows[t][l], "weights.csv");
            traces.ids(t, l) = io::parse_double(ids.rows[t][l], "ids.csv");
        }
    }
    return traces;
}

void write_pcm_csv(const std::filesystem::path& path, const posterior::CoClusteringMatrix& pcm,
                   const std::vector<std::string>& ids) {
    std::vector<std::string> header{"id"};
    header.insert(header.end(), ids.begin(), ids.end());
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < pcm.n(); ++i) {
        std::vector<std::string> row{ids[i]};
        for (int j = 0; j < pcm.n(); ++j) row.push_back(io::fmt_double(pcm.p(i, j)));
        rows.push_back(std::move(row));
    }
    io::write_csv(path, header, rows);
}

void write_partition_json(const std::filesystem::path& path, const posterior::Partition& partition,
                          const std::vector<std::string>& ids) {
    json j;
    j["K"] = partition.K;
    j["vi_score"] = partition.vi_score;
    j["labels"] = partition.labels;
    j["ids"] = ids;
    write_json_file(path, j);
}

posterior::Partition read_partition_json(const std::filesystem::path& path,
                                         std::vector<std::string>* ids) {
    if (!std::filesystem::exists(path)) throw MissingArtifact("postprocess");
    json j = read_json_file(path);
    posterior::Partition p;
    p.K = j.at("K");
    p.vi_score = j.at("vi_score");
    p.labels = j.at("labels").get<std::vector<int>>();
    if (ids) *ids = j.at("ids").get<std::vector<std::string>>();
    return p;
}

void write_median_ids_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const std::vector<double>& medians, const std::vector<int>& clusters) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        rows.push_back({ids[i], io::fmt_double(medians[i]), std::to_string(clusters[i])});
    }
    io::write_csv(path, {"id", "median_id", "cluster"}, rows);
}

void read_median_ids_csv(const std::filesystem::path& path, std::vector<std::string>& ids,
                         std::vector<double>& medians, std::vector<int>& clusters) {
    if (!std::filesystem::exists(path)) throw MissingArtifact("postprocess");
    io::Csv csv = io::read_csv(path);
    for (const auto& row : csv.rows) {
        ids.push_back(row[0]);
        medians.push_back(io::parse_double(row[1], path.string()));
        clusters.push_back(static_cast<int>(io::parse_double(row[2], path.string())));
    }
}

void write_cluster_summaries_json(const std::filesystem::path& path,
                                  const std::vector<posterior::ClusterIdSummary>& summaries) {
    json arr = json::array();
    for (const auto& s : summaries) {
        arr.push_back({{"cluster", s.cluster},
                       {"size", s.size},
                       {"mean", s.mean},
                       {"median", s.median},
                       {"ci_low", s.ci_low},
                       {"ci_high", s.ci_high},
                       {"component_mean", s.component_mean},
                       {"component_median", s.component_median}});
    }
    write_json_file(path, json{{"clusters", arr}});
}

void write_panel(const std::filesystem::path& dir, const pipeline::Panel& panel) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, values] : panel.variables) {
        std::vector<std::string> header{"date"};
        for (const auto& c : panel.countries) header.push_back(c.id);
        std::vector<std::vector<std::string>> rows;
        for (int t = 0; t < panel.t(); ++t) {
            std::vector<std::string> row{pipeline::format_date(panel.dates[t])};
            for (int i = 0; i < panel.n(); ++i) {
                double v = values(i, t);
                row.push_back(std::isnan(v) ? "NA" : io::fmt_double(v));
            }
            rows.push_back(std::move(row));
        }
        io::write_csv(dir / ("processed_" + name + ".csv"), header, rows);
    }
}

void write_provenance_json(const std::filesystem::path& path, const pipeline::Panel& panel) {
    json j;
    j["steps"] = panel.provenance.steps;
    j["dropped_countries"] = panel.provenance.dropped_countries;
    j["standardised"] = panel.provenance.standardised;
    j["countries"] = json::array();
    for (const auto& c : panel.countries) j["countries"].push_back(c.id);
    write_json_file(path, j);
}

spatial::SpatialWeights load_adjacency_csv(const std::filesystem::path& path,
                                           const std::vector<std::string>& ids) {
    io::Csv csv = io::read_csv(path);
    if (csv.header.size() != 2 || csv.header[0] != "from" || csv.header[1] != "to")
        throw ParseError(path.string() + ": expected header 'from,to'");
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);

    spatial::SpatialWeights w;
    w.ids = ids;
    w.w = Eigen::MatrixXd::Zero(ids.size(), ids.size());
    for (const auto& row : csv.rows) {
        auto from = index.find(row[0]), to = index.find(row[1]);
        // edges touching countries outside the analysis cohort are skipped
        if (from == index.end() || to == index.end()) continue;
        if (from->second != to->second) w.w(from->second, to->second) = 1.0;
    }
    w.validate();
    return w;
}

void write_moran_json(const std::filesystem::path& path, const spatial::MoranResult& result,
                      const std::vector<std::pair<std::string, std::pair<double, double>>>& ks_results) {
    json j;
    j["moran"] = {{"I", result.I}, {"p_value", result.p_value}, {"n_perm", result.n_perm}};
    j["ks"] = json::array();
    for (const auto& [name, dp] : ks_results) {
        j["ks"].push_back({{"covariate", name}, {"statistic", dp.first}, {"p_value", dp.second}});
    }
    write_json_file(path, j);
}

}  // namespace mid::artifacts
