#pragma once

#include <optional>
#include <string>

#include "monolip/certify.hpp"
#include "monolip/data.hpp"
#include "monolip/network.hpp"

namespace monolip {

struct LoadedModel {
    MonotonicNetwork net;
    std::optional<Standardization> standardization;
};

/// Versioned JSON document {format_version, spec, layers:[{rows, cols,
/// weights, bias}]}. Weights are stored raw (pre-normalization); the scheme
/// and mode recorded in the spec make the effective weights reproducible
/// bit-exactly. An optional standardization block carries the feature
/// transform fitted at training time.
void save_model(const MonotonicNetwork& net, const std::optional<Standardization>& std,
                const std::string& path);

std::string model_to_json(const MonotonicNetwork& net,
                          const std::optional<Standardization>& std);

LoadedModel load_model(const std::string& path);
LoadedModel model_from_json(const std::string& json_text);

void save_certificate(const Certificate& cert, const std::string& path);
std::string certificate_to_json(const Certificate& cert);

}  // namespace monolip
