#include "monolip/serialize.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "monolip/io.hpp"

namespace monolip {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string to_string(Activation a) {
    return a == Activation::group_sort ? "group_sort" : "relu";
}

std::string to_string(NormScheme s) {
    switch (s) {
        case NormScheme::variant_a: return "variant_a";
        case NormScheme::variant_b: return "variant_b";
        case NormScheme::column_wise: return "column_wise";
    }
    throw std::logic_error("unreachable norm scheme");
}

std::string to_string(NormMode m) {
    return m == NormMode::direct ? "direct" : "project";
}

Activation activation_from_string(const std::string& s) {
    if (s == "group_sort") return Activation::group_sort;
    if (s == "relu") return Activation::relu;
    throw std::runtime_error("unknown activation '" + s + "'");
}

NormScheme scheme_from_string(const std::string& s) {
    if (s == "variant_a") return NormScheme::variant_a;
    if (s == "variant_b") return NormScheme::variant_b;
    if (s == "column_wise") return NormScheme::column_wise;
    throw std::runtime_error("unknown norm scheme '" + s + "'");
}

NormMode mode_from_string(const std::string& s) {
    if (s == "direct") return NormMode::direct;
    if (s == "project") return NormMode::project;
    throw std::runtime_error("unknown norm mode '" + s + "'");
}

json spec_to_json(const NetworkSpec& spec) {
    json j;
    j["input_dim"] = spec.input_dim;
    j["hidden_widths"] = spec.hidden_widths;
    j["output_dim"] = spec.output_dim;
    j["activation"] = to_string(spec.activation);
    j["group_size"] = spec.group_size;
    j["lambda"] = spec.lambda;
    if (spec.lambda_per_input) {
        j["lambda_per_input"] = *spec.lambda_per_input;
    } else {
        j["lambda_per_input"] = nullptr;
    }
    j["monotone_indices"] = spec.monotone_indices;
    j["norm_scheme"] = to_string(spec.norm_scheme);
    j["norm_mode"] = to_string(spec.norm_mode);
    j["seed"] = spec.seed;
    return j;
}

NetworkSpec spec_from_json(const json& j) {
    NetworkSpec spec;
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
    spec.output_dim = j.at("output_dim").get<std::size_t>();
    spec.activation = activation_from_string(j.at("activation").get<std::string>());
    spec.group_size = j.at("group_size").get<std::size_t>();
    spec.lambda = j.at("lambda").get<double>();
    if (!j.at("lambda_per_input").is_null()) {
        spec.lambda_per_input = j.at("lambda_per_input").get<Vector>();
    }
    spec.monotone_indices = j.at("monotone_indices").get<std::vector<std::size_t>>();
    spec.norm_scheme = scheme_from_string(j.at("norm_scheme").get<std::string>());
    spec.norm_mode = mode_from_string(j.at("norm_mode").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

}  // namespace

std::string model_to_json(const MonotonicNetwork& net,
                          const std::optional<Standardization>& std) {
    json j;
    j["format_version"] = kFormatVersion;
    j["spec"] = spec_to_json(net.spec());
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        json lj;
        lj["rows"] = layer.weights.rows();
        lj["cols"] = layer.weights.cols();
        lj["weights"] = layer.weights.data();
        lj["bias"] = layer.bias;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    if (std) {
        json sj;
        sj["feature_names"] = std->feature_names;
        sj["mean"] = std->mean;
        sj["stddev"] = std->stddev;
        j["standardization"] = std::move(sj);
    }
    return j.dump(2) + "\n";
}

void save_model(const MonotonicNetwork& net, const std::optional<Standardization>& std,
                const std::string& path) {
    atomic_write_file(path, model_to_json(net, std));
}

LoadedModel model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
    }
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported model format_version " + std::to_string(version));
    }
    NetworkSpec spec = spec_from_json(j.at("spec"));
    std::vector<DenseLayer> layers;
    for (const auto& lj : j.at("layers")) {
        const auto rows = lj.at("rows").get<std::size_t>();
        const auto cols = lj.at("cols").get<std::size_t>();
        Matrix w(rows, cols, lj.at("weights").get<std::vector<double>>());
        Vector b = lj.at("bias").get<Vector>();
        layers.push_back(DenseLayer{std::move(w), std::move(b)});
    }
    std::optional<Standardization> std_block;
    if (j.contains("standardization") && !j.at("standardization").is_null()) {
        Standardization s;
        const auto& sj = j.at("standardization");
        s.feature_names = sj.at("feature_names").get<std::vector<std::string>>();
        s.mean = sj.at("mean").get<Vector>();
        s.stddev = sj.at("stddev").get<Vector>();
        if (s.mean.size() != s.feature_names.size() ||
            s.stddev.size() != s.feature_names.size()) {
            throw std::runtime_error("standardization block has inconsistent lengths");
        }
        std_block = std::move(s);
    }
    return LoadedModel{MonotonicNetwork(std::move(spec), std::move(layers)),
                       std::move(std_block)};
}

LoadedModel load_model(const std::string& path) {
    return model_from_json(read_file(path));
}

std::string certificate_to_json(const Certificate& cert) {
    json j;
    j["lipschitz_product"] = cert.lipschitz_product;
    j["lambda_budget"] = cert.lambda_budget;
    j["empirical_lipschitz"] = cert.empirical_lipschitz;
    j["monotone_applicable"] = cert.monotone_applicable;
    j["monotone_ok"] = cert.monotone_ok;
    if (std::isnan(cert.worst_partial)) {
        j["worst_partial"] = nullptr;
    } else {
        j["worst_partial"] = cert.worst_partial;
    }
    j["samples"] = cert.samples;
    j["seed"] = cert.seed;
    return j.dump(2) + "\n";
}

void save_certificate(const Certificate& cert, const std::string& path) {
    atomic_write_file(path, certificate_to_json(cert));
}

}  // namespace monolip
