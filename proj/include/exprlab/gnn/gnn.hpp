#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "exprlab/gnn/aggregation.hpp"
#include "exprlab/graph/featured_graph.hpp"
#include "exprlab/graph/quotient.hpp"
#include "exprlab/neural/fnn.hpp"

namespace exprlab {

// Per-vertex feature vectors, vertex-major.
struct FeatureMap {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t n_, std::size_t dim_) : n(n_), dim(dim_), data(n_ * dim_, 0.0) {}

    std::span<double> row(std::size_t v) { return std::span<double>(data).subspan(v * dim, dim); }
    std::span<const double> row(std::size_t v) const {
        return std::span<const double>(data).subspan(v * dim, dim);
    }
};

// One layer: the FNN sees [own feature, agg_1(neighbours), ..., agg_r(neighbours)].
struct GnnLayer {
    Fnn fnn;
    std::vector<Aggregation> aggs;

    GnnLayer(Fnn f, std::vector<Aggregation> a);

    std::size_t in_dim() const { return fnn.input_dim() / (1 + aggs.size()); }
    std::size_t out_dim() const { return fnn.output_dim(); }
};

enum class ReadoutAgg { sum, avg };

struct Readout {
    ReadoutAgg agg = ReadoutAgg::sum;
    Fnn fnn;
};

// Sequence of layers with chained dimensions and an optional readout.
class Gnn {
public:
    Gnn(std::vector<GnnLayer> layers, std::optional<Readout> readout = std::nullopt);

    const std::vector<GnnLayer>& layers() const { return layers_; }
    const std::optional<Readout>& readout() const { return readout_; }
    std::size_t depth() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.front().in_dim(); }
    std::size_t output_dim() const { return layers_.back().out_dim(); }
    // Sum of the layer FNN node counts.
    std::size_t size() const;
    // Largest layer input dimension p.
    std::size_t max_layer_input_dim() const;

    // Every layer has exactly one aggregation and it is of this kind.
    bool uses_only(AggKind kind) const;

private:
    std::vector<GnnLayer> layers_;
    std::optional<Readout> readout_;
};

// trace[0] is the input feature map; trace[i] the output of layer i.
using LayerTrace = std::vector<FeatureMap>;

FeatureMap input_features(const FeaturedGraph& g);

// Vertices without neighbours receive the zero vector in every aggregation slot.
FeatureMap layer_forward(const GnnLayer& layer, const FeaturedGraph& g, const FeatureMap& feats);
LayerTrace gnn_forward(const Gnn& gnn, const FeaturedGraph& g);
std::vector<double> readout_eval(const Gnn& gnn, const FeaturedGraph& g);

// Forward pass on a quotient; the maps hold one row per class.
LayerTrace gnn_forward(const Gnn& gnn, const QuotientGraph& q);
std::vector<double> target_output(const Gnn& gnn, const QuotientGraph& q);
// Readout evaluated through class sizes.
std::vector<double> readout_eval(const Gnn& gnn, const QuotientGraph& q);

nlohmann::json to_json(const Gnn& gnn);
Gnn gnn_from_json(const nlohmann::json& j);
void write_gnn(const std::filesystem::path& path, const Gnn& gnn);
Gnn read_gnn(const std::filesystem::path& path);

}  // namespace exprlab
