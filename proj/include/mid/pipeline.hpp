#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mid/geometry.hpp"

namespace mid::pipeline {

using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);      // "YYYY-MM-DD"
std::string format_date(Date d);
Date make_date(int year, unsigned month, unsigned day);

struct CountryMeta {
    std::string id;
    std::string name;
    double population = 0.0;
    std::string income_group;                             // optional
    std::optional<std::pair<double, double>> centroid;    // lat, lon degrees
};

/// Country x time panel of named daily variables. Missing cells are NaN.
struct Panel {
    std::vector<CountryMeta> countries;
    std::vector<Date> dates;                                   // contiguous, daily
    std::vector<std::pair<std::string, Eigen::MatrixXd>> variables;  // name -> n x T

    struct Provenance {
        std::vector<std::string> steps;
        std::vector<std::string> dropped_countries;
        bool standardised = false;
    } provenance;

    int n() const { return static_cast<int>(countries.size()); }
    int t() const { return static_cast<int>(dates.size()); }
    const Eigen::MatrixXd& variable(const std::string& name) const;
};

/// Four inclusive stage windows partitioning 1 Mar 2020 .. 29 May 2021.
struct StageWindow {
    int label;
    Date start, end;
};
const std::array<StageWindow, 4>& stage_windows();

/// Loads one wide CSV per variable (header `date,<id>,<id>,...`, empty or
/// `NA` cells are missing) plus a metadata CSV `id,name,population
/// [,income_group,lat,lon]`, aligned to [start, end]. Countries absent from
/// a file carry an all-missing series for that variable.
Panel load_panel(const std::vector<std::pair<std::string, std::filesystem::path>>& variable_csvs,
                 const std::filesystem::path& metadata_csv, Date start, Date end);

/// Drops countries whose missing fraction exceeds the threshold in ANY
/// variable (strictly greater). Throws AllFiltered.
Panel filter_missing(const Panel& panel, double threshold = 0.20);

/// Interior gaps linearly interpolated over the time index; leading and
/// trailing gaps take the nearest observed value. Throws TooFewObserved.
Panel impute_linear(const Panel& panel);

/// Drops countries with population strictly below min_pop.
Panel filter_population(const Panel& panel, double min_pop = 1'000'000.0);

/// Pooled z-score per variable: one mean/sd pair over all countries and
/// dates. Throws ZeroVariance naming the variable. Re-standardising an
/// already standardised panel is legal and recorded in provenance.
Panel zscore_panel(const Panel& panel);

/// Restriction of the panel to an inclusive date window.
Panel truncate_dates(const Panel& panel, Date start, Date end);

/// The four Table-style stage panels. Throws CoverageError if the panel does
/// not span all windows. Stage panels are NOT re-standardised here; callers
/// doing per-stage analyses z-score within the window afterwards.
std::array<Panel, 4> stratify_stages(const Panel& panel);

/// One row per country; columns are each variable's full series concatenated
/// in the given order: column index = var_pos * T + date_pos.
/// Throws NotImputed if any missing cell remains.
geometry::DataMatrix assemble_matrix(const Panel& panel,
                                     const std::vector<std::string>& variable_order);

}  // namespace mid::pipeline
