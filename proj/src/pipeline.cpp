#include "mid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mid/io.hpp"

namespace mid::pipeline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_field(const std::string& s) { return s.empty() || s == "NA"; }

Panel select_rows(const Panel& panel, const std::vector<int>& keep) {
    Panel out;
    out.dates = panel.dates;
    out.provenance = panel.provenance;
    for (int i : keep) out.countries.push_back(panel.countries[i]);
    for (const auto& [name, values] : panel.variables) {
        Eigen::MatrixXd sub(keep.size(), values.cols());
        for (std::size_t r = 0; r < keep.size(); ++r) sub.row(r) = values.row(keep[r]);
        out.variables.emplace_back(name, std::move(sub));
    }
    return out;
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) throw ParseError("invalid calendar date");
    return std::chrono::sys_days{ymd};
}

Date parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw ParseError("expected YYYY-MM-DD date, got '" + std::string(iso) + "'");
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (iso[i] < '0' || iso[i] > '9')
                throw ParseError("expected YYYY-MM-DD date, got '" + std::string(iso) + "'");
            v = v * 10 + (iso[i] - '0');
        }
        return v;
    };
    return make_date(num(0, 4), num(5, 2), num(8, 2));
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

const Eigen::MatrixXd& Panel::variable(const std::string& name) const {
    for (const auto& [n, v] : variables) {
        if (n == name) return v;
    }
    throw Error("panel has no variable '" + name + "'");
}

const std::array<StageWindow, 4>& stage_windows() {
    static const std::array<StageWindow, 4> windows = {{
        {1, make_date(2020, 3, 1), make_date(2020, 6, 23)},
        {2, make_date(2020, 6, 24), make_date(2020, 10, 15)},
        {3, make_date(2020, 10, 16), make_date(2021, 2, 6)},
        {4, make_date(2021, 2, 7), make_date(2021, 5, 29)},
    }};
    return windows;
}

Panel load_panel(const std::vector<std::pair<std::string, std::filesystem::path>>& variable_csvs,
                 const std::filesystem::path& metadata_csv, Date start, Date end) {
    if (variable_csvs.empty()) throw Error("no variable files given");
    if (start > end) throw Error("date range is empty");

    // metadata
    io::Csv meta = io::read_csv(metadata_csv);
    auto col = [&](const std::string& name) {
        auto it = std::find(meta.header.begin(), meta.header.end(), name);
        return it == meta.header.end() ? -1
                                       : static_cast<int>(it - meta.header.begin());
    };
    int c_id = col("id"), c_name = col("name"), c_pop = col("population");
    int c_income = col("income_group"), c_lat = col("lat"), c_lon = col("lon");
    if (c_id < 0 || c_name < 0 || c_pop < 0)
        throw ParseError(metadata_csv.string() + ": need id,name,population columns");
    std::map<std::string, CountryMeta> meta_by_id;
    for (const auto& row : meta.rows) {
        CountryMeta m;
        m.id = row[c_id];
        m.name = row[c_name];
        m.population = io::parse_double(row[c_pop], "population of " + m.id);
        if (c_income >= 0) m.income_group = row[c_income];
        if (c_lat >= 0 && c_lon >= 0 && !is_missing_field(row[c_lat]) &&
            !is_missing_field(row[c_lon])) {
            m.centroid = {{io::parse_double(row[c_lat], "lat of " + m.id),
                           io::parse_double(row[c_lon], "lon of " + m.id)}};
        }
        meta_by_id[m.id] = m;
    }

    const int T = static_cast<int>((end - start).count()) + 1;

    // per-variable cells, keyed by country id; ingestion is order-independent
    struct VarData {
        std::string name;
        std::map<std::string, std::vector<double>> series;
    };
    std::vector<VarData> vars;
    std::set<std::string> all_ids;
    for (const auto& [var_name, path] : variable_csvs) {
        io::Csv csv = io::read_csv(path);
        if (csv.header.empty() || csv.header[0] != "date")
            throw ParseError(path.string() + ": first header column must be 'date'");
        VarData vd;
        vd.name = var_name;
        for (std::size_t c = 1; c < csv.header.size(); ++c) {
            vd.series[csv.header[c]] = std::vector<double>(T, kNaN);
            all_ids.insert(csv.header[c]);
        }
        std::vector<bool> seen(T, false);
        for (const auto& row : csv.rows) {
            Date d = parse_date(row[0]);
            if (d < start || d > end) continue;
            int t = static_cast<int>((d - start).count());
            seen[t] = true;
            for (std::size_t c = 1; c < csv.header.size(); ++c) {
                if (!is_missing_field(row[c])) {
                    vd.series[csv.header[c]][t] =
                        io::parse_double(row[c], path.string() + " " + row[0]);
                }
            }
        }
        for (int t = 0; t < T; ++t) {
            if (!seen[t])
                throw DateGap(path.string() + " has no row for " +
                              format_date(start + std::chrono::days{t}));
        }
        vars.push_back(std::move(vd));
    }

    Panel panel;
    panel.dates.resize(T);
    for (int t = 0; t < T; ++t) panel.dates[t] = start + std::chrono::days{t};
    for (const std::string& id : all_ids) {
        auto it = meta_by_id.find(id);
        if (it != meta_by_id.end()) {
            panel.countries.push_back(it->second);
        } else {
            CountryMeta m;
            m.id = id;
            m.population = kNaN;
            panel.countries.push_back(m);
        }
    }
    for (const auto& vd : vars) {
        Eigen::MatrixXd values(panel.n(), T);
        for (int i = 0; i < panel.n(); ++i) {
            auto it = vd.series.find(panel.countries[i].id);
            for (int t = 0; t < T; ++t)
                values(i, t) = it == vd.series.end() ? kNaN : it->second[t];
        }
        panel.variables.emplace_back(vd.name, std::move(values));
    }
    panel.provenance.steps.push_back("load " + format_date(start) + ".." + format_date(end));
    return panel;
}

Panel filter_missing(const Panel& panel, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw Error("threshold must be in [0,1]");
    std::vector<int> keep;
    std::vector<std::string> dropped;
    for (int i = 0; i < panel.n(); ++i) {
        bool drop = false;
        for (const auto& [name, values] : panel.variables) {
            int missing = 0;
            for (int t = 0; t < panel.t(); ++t) {
                if (std::isnan(values(i, t))) ++missing;
            }
            if (static_cast<double>(missing) / panel.t() > threshold) {
                drop = true;
                break;
            }
        }
        if (drop) {
            dropped.push_back(panel.countries[i].id);
        } else {
            keep.push_back(i);
        }
    }
    if (keep.empty()) throw AllFiltered("missing-data");
    Panel out = select_rows(panel, keep);
    out.provenance.steps.push_back("filter_missing threshold=" + io::fmt_double(threshold));
    out.provenance.dropped_countries.insert(out.provenance.dropped_countries.end(),
                                            dropped.begin(), dropped.end());
    return out;
}

Panel impute_linear(const Panel& panel) {
    Panel out = panel;
    const int T = panel.t();
    for (auto& [name, values] : out.variables) {
        for (int i = 0; i < out.n(); ++i) {
            std::vector<int> observed;
            for (int t = 0; t < T; ++t) {
                if (!std::isnan(values(i, t))) observed.push_back(t);
            }
            if (static_cast<int>(observed.size()) == T) continue;
            if (observed.size() < 2) throw TooFewObserved(out.countries[i].id, name);
            for (int t = 0; t < T; ++t) {
                if (!std::isnan(values(i, t))) continue;
                auto next = std::lower_bound(observed.begin(), observed.end(), t);
                if (next == observed.begin()) {
                    values(i, t) = values(i, observed.front());       // leading gap
                } else if (next == observed.end()) {
                    values(i, t) = values(i, observed.back());        // trailing gap
                } else {
                    int hi = *next, lo = *(next - 1);
                    double frac = static_cast<double>(t - lo) / (hi - lo);
                    values(i, t) = values(i, lo) * (1.0 - frac) + values(i, hi) * frac;
                }
            }
        }
    }
    out.provenance.steps.push_back("impute_linear");
    return out;
}

Panel filter_population(const Panel& panel, double min_pop) {
    std::vector<int> keep;
    std::vector<std::string> dropped;
    for (int i = 0; i < panel.n(); ++i) {
        if (std::isnan(panel.countries[i].population))
            throw Error("population metadata missing for " + panel.countries[i].id);
        if (panel.countries[i].population < min_pop) {
            dropped.push_back(panel.countries[i].id);
        } else {
            keep.push_back(i);
        }
    }
    if (keep.empty()) throw AllFiltered("population");
    Panel out = select_rows(panel, keep);
    out.provenance.steps.push_back("filter_population min_pop=" + io::fmt_double(min_pop));
    out.provenance.dropped_countries.insert(out.provenance.dropped_countries.end(),
                                            dropped.begin(), dropped.end());
    return out;
}

Panel zscore_panel(const Panel& panel) {
    Panel out = panel;
    for (auto& [name, values] : out.variables) {
        double sum = 0.0;
        long count = 0;
        for (int i = 0; i < out.n(); ++i) {
            for (int t = 0; t < out.t(); ++t) {
                if (!std::isnan(values(i, t))) {
                    sum += values(i, t);
                    ++count;
                }
            }
        }
        if (count < 2) throw ZeroVariance("variable " + name + " has too few cells");
        double mean = sum / count;
        double ss = 0.0;
        for (int i = 0; i < out.n(); ++i) {
            for (int t = 0; t < out.t(); ++t) {
                if (!std::isnan(values(i, t))) {
                    double dv = values(i, t) - mean;
                    ss += dv * dv;
                }
            }
        }
        double sd = std::sqrt(ss / (count - 1));
        if (sd == 0.0) throw ZeroVariance("variable " + name + " is constant");
        for (int i = 0; i < out.n(); ++i) {
            for (int t = 0; t < out.t(); ++t) {
                if (!std::isnan(values(i, t))) values(i, t) = (values(i, t) - mean) / sd;
            }
        }
    }
    if (out.provenance.standardised)
        out.provenance.steps.push_back("zscore (re-standardised)");
    else
        out.provenance.steps.push_back("zscore");
    out.provenance.standardised = true;
    return out;
}

Panel truncate_dates(const Panel& panel, Date start, Date end) {
    if (panel.dates.empty() || start > end || start < panel.dates.front() ||
        end > panel.dates.back())
        throw CoverageError("panel does not cover " + format_date(start) + ".." +
                            format_date(end));
    int offset = static_cast<int>((start - panel.dates.front()).count());
    int T = static_cast<int>((end - start).count()) + 1;
    Panel out;
    out.countries = panel.countries;
    out.provenance = panel.provenance;
    out.dates.assign(panel.dates.begin() + offset, panel.dates.begin() + offset + T);
    for (const auto& [name, values] : panel.variables)
        out.variables.emplace_back(name, values.middleCols(offset, T));
    out.provenance.steps.push_back("truncate " + format_date(start) + ".." +
                                   format_date(end));
    return out;
}

std::array<Panel, 4> stratify_stages(const Panel& panel) {
    const auto& windows = stage_windows();
    if (panel.dates.empty() || panel.dates.front() > windows.front().start ||
        panel.dates.back() < windows.back().end)
        throw CoverageError("panel does not span the four stage windows");
    return {truncate_dates(panel, windows[0].start, windows[0].end),
            truncate_dates(panel, windows[1].start, windows[1].end),
            truncate_dates(panel, windows[2].start, windows[2].end),
            truncate_dates(panel, windows[3].start, windows[3].end)};
}

geometry::DataMatrix assemble_matrix(const Panel& panel,
                                     const std::vector<std::string>& variable_order) {
    if (variable_order.empty()) throw Error("variable_order is empty");
    const int T = panel.t();
    geometry::DataMatrix out;
    out.values.resize(panel.n(), static_cast<Eigen::Index>(variable_order.size()) * T);
    for (std::size_t v = 0; v < variable_order.size(); ++v) {
        const Eigen::MatrixXd& values = panel.variable(variable_order[v]);
        for (int i = 0; i < panel.n(); ++i) {
            for (int t = 0; t < T; ++t) {
                double x = values(i, t);
                if (std::isnan(x))
                    throw NotImputed("missing cell for " + panel.countries[i].id +
                                     " in " + variable_order[v] + " at " +
                                     format_date(panel.dates[t]));
                out.values(i, static_cast<Eigen::Index>(v) * T + t) = x;
            }
        }
    }
    out.row_ids.reserve(panel.n());
    for (const auto& c : panel.countries) out.row_ids.push_back(c.id);
    return out;
}

}  // namespace mid::pipeline
