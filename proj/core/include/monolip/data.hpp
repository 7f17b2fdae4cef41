#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monolip/linalg.hpp"
#include "monolip/training.hpp"

namespace monolip {

enum class BackgroundKind { prompt, material, fake };

/// One decay-vertex candidate. Features are strictly positive; the true
/// lifetime is defined for signal only and the background kind for
/// background only.
struct DvEvent {
    double sum_pt = 0.0;       // scalar sum of transverse momenta, GeV-like units
    double min_ipchi2 = 0.0;   // smaller impact-parameter chi2 increase
    double vertex_chi2 = 0.0;  // vertex fit quality
    double fd_chi2 = 0.0;      // flight-distance significance
    bool is_signal = false;
    std::optional<BackgroundKind> background_kind;
    std::optional<double> true_lifetime_ps;

    bool operator==(const DvEvent&) const = default;
};

inline constexpr std::array<const char*, 4> kFeatureNames = {"sum_pt", "min_ipchi2",
                                                             "vertex_chi2", "fd_chi2"};

/// Index of a feature column by name; throws listing valid names.
std::size_t feature_index(const std::string& name);

double feature_value(const DvEvent& event, std::size_t index);

/// Per-feature affine transform applied after log1p, fitted on a training
/// split. A near-constant column gets unit scale instead of dividing by ~0.
struct Standardization {
    std::vector<std::string> feature_names;
    Vector mean;
    Vector stddev;

    bool operator==(const Standardization&) const = default;
};

struct Dataset {
    std::vector<DvEvent> events;
    std::optional<Standardization> standardization;

    bool operator==(const Dataset&) const = default;
};

struct PopulationFractions {
    double signal = 0.50;
    double prompt = 0.22;
    double material = 0.18;
    double fake = 0.10;

    void validate() const;  // non-negative, summing to 1
};

/// Distribution parameters of the synthetic generator. Defaults reproduce
/// the qualitative geometry of the trigger problem: prompt background sits at
/// small displacement and small momentum, material interactions at larger
/// displacement than signal with small momentum, fakes at large momentum,
/// and signal displacement grows with its exponentially distributed
/// lifetime.
struct GeneratorConfig {
    double signal_lifetime_mean_ps = 1.5;
    double signal_sumpt_logmedian = 1.7917594692280550;  // log(6)
    double signal_sumpt_logsigma = 0.5;
    double signal_boost_shape = 2.0;
    double signal_boost_scale = 1.0;
    double signal_fd_scale = 2.5;  // fd significance = scale * lifetime * boost
    double signal_ip_logratio_median = -1.6;  // min_ipchi2 = fd_chi2 * lognormal(ratio)
    double signal_ip_logratio_sigma = 0.8;
    double signal_vchi2_logmedian = 0.6931471805599453;  // log(2)
    double signal_vchi2_logsigma = 0.6;

    double prompt_fd_sigma = 1.2;  // fd_chi2 = normal(0, sigma)^2
    double prompt_ip_sigma = 1.0;
    double prompt_sumpt_logmedian = 0.6931471805599453;  // log(2)
    double prompt_sumpt_logsigma = 0.5;
    double prompt_vchi2_logmedian = 1.0986122886681098;  // log(3)
    double prompt_vchi2_logsigma = 0.7;

    double material_fd_logmedian = 5.7037824746562009;  // log(300)
    double material_fd_logsigma = 0.9;
    double material_ip_logmedian = 4.0943445622221004;  // log(60)
    double material_ip_logsigma = 0.9;
    double material_sumpt_logmedian = 1.2527629684953681;  // log(3.5)
    double material_sumpt_logsigma = 0.6;
    double material_vchi2_logmedian = 1.0986122886681098;  // log(3)
    double material_vchi2_logsigma = 0.8;

    double fake_sumpt_pareto_min = 4.0;
    double fake_sumpt_pareto_alpha = 1.5;
    double fake_ip_logmedian = 2.0794415416798357;  // log(8)
    double fake_ip_logsigma = 1.5;
    double fake_fd_logmedian = 3.4011973816621555;  // log(30)
    double fake_fd_logsigma = 1.5;
    double fake_vchi2_logmedian = 2.4849066497880004;  // log(12)
    double fake_vchi2_logsigma = 0.8;
};

/// Deterministic synthetic sample of n events. Throws on n == 0 or invalid
/// fractions.
Dataset generate_synthetic(std::size_t n, const PopulationFractions& fractions,
                           std::uint64_t seed, const GeneratorConfig& config = {});

/// CSV with header sum_pt,min_ipchi2,vertex_chi2,fd_chi2,label,
/// background_kind,true_lifetime_ps; empty fields where not applicable;
/// numbers in shortest round-trip form so load(save(d)) == d exactly.
void save_csv(const Dataset& dataset, const std::string& path);
Dataset load_csv(const std::string& path);

Standardization fit_standardization(const std::vector<DvEvent>& events,
                                    const std::vector<std::string>& feature_names);

/// Returns a copy with a standardization fitted on the dataset itself (fit
/// on a training split and reuse the result for held-out data).
Dataset standardize(const Dataset& dataset);

/// log1p then (x - mean) / std for the named features, in order.
Vector standardized_features(const DvEvent& event, const Standardization& std);

TrainingSet to_training_set(const std::vector<DvEvent>& events, const Standardization& std);

/// Per-feature median of the raw feature columns.
Vector feature_medians(const std::vector<DvEvent>& events,
                       const std::vector<std::string>& feature_names);

std::string to_string(BackgroundKind kind);
BackgroundKind background_kind_from_string(const std::string& text);

}  // namespace monolip
