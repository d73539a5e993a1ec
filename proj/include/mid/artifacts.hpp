#pragma once

#include <filesystem>

#include "mid/hidalgo.hpp"
#include "mid/pipeline.hpp"
#include "mid/posterior.hpp"
#include "mid/spatial.hpp"

namespace mid::artifacts {

// Assembled data matrix: header `id,c0,c1,...`, one row per observation.
void write_matrix_csv(const std::filesystem::path& path, const geometry::DataMatrix& data);
geometry::DataMatrix read_matrix_csv(const std::filesystem::path& path);

// MCMC traces: three CSVs (labels.csv, weights.csv, ids.csv) plus a
// fit_config.json sidecar echoing the configuration and seed.
void write_traces(const std::filesystem::path& dir, const hidalgo::McmcTraces& traces);
hidalgo::McmcTraces read_traces(const std::filesystem::path& dir);

void write_pcm_csv(const std::filesystem::path& path, const posterior::CoClusteringMatrix& pcm,
                   const std::vector<std::string>& ids);

void write_partition_json(const std::filesystem::path& path, const posterior::Partition& partition,
                          const std::vector<std::string>& ids);
posterior::Partition read_partition_json(const std::filesystem::path& path,
                                         std::vector<std::string>* ids = nullptr);

// Per-observation posterior medians: header `id,median_id,cluster`.
void write_median_ids_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const std::vector<double>& medians, const std::vector<int>& clusters);
void read_median_ids_csv(const std::filesystem::path& path, std::vector<std::string>& ids,
                         std::vector<double>& medians, std::vector<int>& clusters);

void write_cluster_summaries_json(const std::filesystem::path& path,
                                  const std::vector<posterior::ClusterIdSummary>& summaries);

// One wide CSV per variable (same layout the loader ingests) plus a
// provenance sidecar listing applied steps and dropped countries.
void write_panel(const std::filesystem::path& dir, const pipeline::Panel& panel);
void write_provenance_json(const std::filesystem::path& path, const pipeline::Panel& panel);

// Adjacency CSV `from,to`, one directed edge per row; ids resolve edge
// labels to rows. Every listed row must end up with a neighbour.
spatial::SpatialWeights load_adjacency_csv(const std::filesystem::path& path,
                                           const std::vector<std::string>& ids);

void write_moran_json(const std::filesystem::path& path, const spatial::MoranResult& result,
                      const std::vector<std::pair<std::string, std::pair<double, double>>>& ks_results);

}  // namespace mid::artifacts
