#include "monolip/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "monolip/io.hpp"
#include "monolip/random.hpp"

namespace monolip {

std::size_t feature_index(const std::string& name) {
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
        if (name == kFeatureNames[i]) return i;
    }
    std::string valid;
    for (const char* f : kFeatureNames) {
        if (!valid.empty()) valid += ", ";
        valid += f;
    }
    throw std::invalid_argument("unknown feature '" + name + "' (valid: " + valid + ")");
}

double feature_value(const DvEvent& event, std::size_t index) {
    switch (index) {
        case 0: return event.sum_pt;
        case 1: return event.min_ipchi2;
        case 2: return event.vertex_chi2;
        case 3: return event.fd_chi2;
        default: throw std::out_of_range("feature index out of range");
    }
}

void PopulationFractions::validate() const {
    const double values[] = {signal, prompt, material, fake};
    double sum = 0.0;
    for (double f : values) {
        if (!(f >= 0.0) || !std::isfinite(f)) {
            throw std::invalid_argument("population fractions must be non-negative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("population fractions must sum to 1");
    }
}

namespace {

DvEvent draw_signal(Rng& rng, const GeneratorConfig& cfg) {
    DvEvent e;
    e.is_signal = true;
    const double lifetime = rng.exponential(cfg.signal_lifetime_mean_ps);
    e.true_lifetime_ps = lifetime;
    e.sum_pt = rng.lognormal(cfg.signal_sumpt_logmedian, cfg.signal_sumpt_logsigma);
    const double boost = rng.gamma(cfg.signal_boost_shape, cfg.signal_boost_scale);
    const double fd_significance = cfg.signal_fd_scale * lifetime * boost;
    // measured chi2 = true displacement squared plus the same resolution
    // smearing that gives prompt vertices their nonzero displacement
    const double fd_res = rng.normal(0.0, cfg.prompt_fd_sigma);
    const double ip_res = rng.normal(0.0, cfg.prompt_ip_sigma);
    const double true_fd_chi2 = fd_significance * fd_significance;
    e.fd_chi2 = true_fd_chi2 + fd_res * fd_res;
    e.min_ipchi2 =
        true_fd_chi2 * rng.lognormal(cfg.signal_ip_logratio_median, cfg.signal_ip_logratio_sigma) +
        ip_res * ip_res;
    e.vertex_chi2 = rng.lognormal(cfg.signal_vchi2_logmedian, cfg.signal_vchi2_logsigma);
    return e;
}

DvEvent draw_prompt(Rng& rng, const GeneratorConfig& cfg) {
    DvEvent e;
    e.background_kind = BackgroundKind::prompt;
    const double fd_res = rng.normal(0.0, cfg.prompt_fd_sigma);
    const double ip_res = rng.normal(0.0, cfg.prompt_ip_sigma);
    e.fd_chi2 = fd_res * fd_res;
    e.min_ipchi2 = ip_res * ip_res;
    e.sum_pt = rng.lognormal(cfg.prompt_sumpt_logmedian, cfg.prompt_sumpt_logsigma);
    e.vertex_chi2 = rng.lognormal(cfg.prompt_vchi2_logmedian, cfg.prompt_vchi2_logsigma);
    return e;
}

DvEvent draw_material(Rng& rng, const GeneratorConfig& cfg) {
    DvEvent e;
    e.background_kind = BackgroundKind::material;
    e.fd_chi2 = rng.lognormal(cfg.material_fd_logmedian, cfg.material_fd_logsigma);
    e.min_ipchi2 = rng.lognormal(cfg.material_ip_logmedian, cfg.material_ip_logsigma);
    e.sum_pt = rng.lognormal(cfg.material_sumpt_logmedian, cfg.material_sumpt_logsigma);
    e.vertex_chi2 = rng.lognormal(cfg.material_vchi2_logmedian, cfg.material_vchi2_logsigma);
    return e;
}

DvEvent draw_fake(Rng& rng, const GeneratorConfig& cfg) {
    DvEvent e;
    e.background_kind = BackgroundKind::fake;
    e.sum_pt = rng.pareto(cfg.fake_sumpt_pareto_min, cfg.fake_sumpt_pareto_alpha);
    e.min_ipchi2 = rng.lognormal(cfg.fake_ip_logmedian, cfg.fake_ip_logsigma);
    e.fd_chi2 = rng.lognormal(cfg.fake_fd_logmedian, cfg.fake_fd_logsigma);
    e.vertex_chi2 = rng.lognormal(cfg.fake_vchi2_logmedian, cfg.fake_vchi2_logsigma);
    return e;
}

// Features must stay strictly positive; resolution-squared draws can
// underflow to exactly zero.
double clamp_positive(double x) { return x > 1e-12 ? x : 1e-12; }

}  // namespace

Dataset generate_synthetic(std::size_t n, const PopulationFractions& fractions,
                           std::uint64_t seed, const GeneratorConfig& config) {
    if (n == 0) throw std::invalid_argument("cannot generate an empty dataset");
    fractions.validate();
    Rng rng(mix_seed(seed, 0x44u));
    Dataset dataset;
    dataset.events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        DvEvent e;
        if (u < fractions.signal) {
            e = draw_signal(rng, config);
        } else if (u < fractions.signal + fractions.prompt) {
            e = draw_prompt(rng, config);
        } else if (u < fractions.signal + fractions.prompt + fractions.material) {
            e = draw_material(rng, config);
        } else {
            e = draw_fake(rng, config);
        }
        e.sum_pt = clamp_positive(e.sum_pt);
        e.min_ipchi2 = clamp_positive(e.min_ipchi2);
        e.vertex_chi2 = clamp_positive(e.vertex_chi2);
        e.fd_chi2 = clamp_positive(e.fd_chi2);
        dataset.events.push_back(std::move(e));
    }
    return dataset;
}

std::string to_string(BackgroundKind kind) {
    switch (kind) {
        case BackgroundKind::prompt: return "prompt";
        case BackgroundKind::material: return "material";
        case BackgroundKind::fake: return "fake";
    }
    throw std::logic_error("unreachable background kind");
}

BackgroundKind background_kind_from_string(const std::string& text) {
    if (text == "prompt") return BackgroundKind::prompt;
    if (text == "material") return BackgroundKind::material;
    if (text == "fake") return BackgroundKind::fake;
    throw std::invalid_argument("unknown background kind '" + text + "'");
}

namespace {

constexpr const char* kCsvHeader =
    "sum_pt,min_ipchi2,vertex_chi2,fd_chi2,label,background_kind,true_lifetime_ps";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_number,
                            const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + why);
}

}  // namespace

void save_csv(const Dataset& dataset, const std::string& path) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& e : dataset.events) {
        out << format_double(e.sum_pt) << ',' << format_double(e.min_ipchi2) << ','
            << format_double(e.vertex_chi2) << ',' << format_double(e.fd_chi2) << ','
            << (e.is_signal ? "signal" : "background") << ',';
        if (e.background_kind) out << to_string(*e.background_kind);
        out << ',';
        if (e.true_lifetime_ps) out << format_double(*e.true_lifetime_ps);
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

Dataset load_csv(const std::string& path) {
    const std::string content = read_file(path);
    if (content.empty()) {
        throw std::runtime_error("dataset file is empty: " + path);
    }
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error(path + ": header mismatch, expected '" + kCsvHeader + "'");
    }
    Dataset dataset;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            row_error(path, line_number,
                      "expected 7 fields, got " + std::to_string(fields.size()));
        }
        DvEvent e;
        try {
            e.sum_pt = parse_double(fields[0]);
            e.min_ipchi2 = parse_double(fields[1]);
            e.vertex_chi2 = parse_double(fields[2]);
            e.fd_chi2 = parse_double(fields[3]);
        } catch (const std::invalid_argument& err) {
            row_error(path, line_number, err.what());
        }
        for (double v : {e.sum_pt, e.min_ipchi2, e.vertex_chi2, e.fd_chi2}) {
            if (!std::isfinite(v) || !(v > 0.0)) {
                row_error(path, line_number, "features must be positive and finite");
            }
        }
        if (fields[4] == "signal") {
            e.is_signal = true;
        } else if (fields[4] == "background") {
            e.is_signal = false;
        } else {
            row_error(path, line_number, "label must be 'signal' or 'background'");
        }
        if (!fields[5].empty()) {
            if (e.is_signal) row_error(path, line_number, "signal rows carry no background kind");
            try {
                e.background_kind = background_kind_from_string(fields[5]);
            } catch (const std::invalid_argument& err) {
                row_error(path, line_number, err.what());
            }
        } else if (!e.is_signal) {
            row_error(path, line_number, "background rows need a background kind");
        }
        if (!fields[6].empty()) {
            if (!e.is_signal) row_error(path, line_number, "background rows carry no lifetime");
            try {
                e.true_lifetime_ps = parse_double(fields[6]);
            } catch (const std::invalid_argument& err) {
                row_error(path, line_number, err.what());
            }
            if (!(*e.true_lifetime_ps > 0.0)) {
                row_error(path, line_number, "lifetime must be positive");
            }
        } else if (e.is_signal) {
            row_error(path, line_number, "signal rows need a true lifetime");
        }
        dataset.events.push_back(std::move(e));
    }
    return dataset;
}

Standardization fit_standardization(const std::vector<DvEvent>& events,
                                    const std::vector<std::string>& feature_names) {
    if (events.empty()) throw std::invalid_argument("cannot fit standardization on no events");
    Standardization std_out;
    std_out.feature_names = feature_names;
    std_out.mean.resize(feature_names.size());
    std_out.stddev.resize(feature_names.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        const std::size_t idx = feature_index(feature_names[f]);
        double sum = 0.0;
        for (const auto& e : events) sum += std::log1p(feature_value(e, idx));
        const double mean = sum / static_cast<double>(events.size());
        double var = 0.0;
        for (const auto& e : events) {
            const double d = std::log1p(feature_value(e, idx)) - mean;
            var += d * d;
        }
        var /= static_cast<double>(events.size());
        double sd = std::sqrt(var);
        if (!(sd > 1e-12)) sd = 1.0;  // constant column
        std_out.mean[f] = mean;
        std_out.stddev[f] = sd;
    }
    return std_out;
}

Dataset standardize(const Dataset& dataset) {
    Dataset out = dataset;
    std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
    out.standardization = fit_standardization(dataset.events, names);
    return out;
}

Vector standardized_features(const DvEvent& event, const Standardization& std) {
    Vector out(std.feature_names.size());
    for (std::size_t f = 0; f < std.feature_names.size(); ++f) {
        const std::size_t idx = feature_index(std.feature_names[f]);
        out[f] = (std::log1p(feature_value(event, idx)) - std.mean[f]) / std.stddev[f];
    }
    return out;
}

TrainingSet to_training_set(const std::vector<DvEvent>& events, const Standardization& std) {
    TrainingSet set;
    set.inputs.reserve(events.size());
    set.targets.reserve(events.size());
    for (const auto& e : events) {
        set.inputs.push_back(standardized_features(e, std));
        set.targets.push_back(e.is_signal ? 1.0 : 0.0);
    }
    return set;
}

Vector feature_medians(const std::vector<DvEvent>& events,
                       const std::vector<std::string>& feature_names) {
    if (events.empty()) throw std::invalid_argument("cannot take medians of no events");
    Vector medians(feature_names.size());
    std::vector<double> column(events.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        const std::size_t idx = feature_index(feature_names[f]);
        for (std::size_t i = 0; i < events.size(); ++i) {
            column[i] = feature_value(events[i], idx);
        }
        std::sort(column.begin(), column.end());
        const std::size_t n = column.size();
        medians[f] = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return medians;
}

}  // namespace monolip
