#include <map>
#include <stdexcept>

#include "ndg/io.hpp"
#include "ndg/refinement.hpp"

namespace ndg {

void save_gru_weights(GruWeights& w, const std::filesystem::path& path) {
    std::vector<NamedTensor> tensors;
    for (auto [name, p] : w.named_params()) {
        NamedTensor t;
        t.name = name;
        t.dims = {static_cast<uint32_t>(p->channels()), static_cast<uint32_t>(p->height()),
                  static_cast<uint32_t>(p->width())};
        t.data = p->values();
        tensors.push_back(std::move(t));
    }
    write_tensor_container(tensors, path);
}

GruWeights load_gru_weights(const std::filesystem::path& path, RefineConfig* cfg_out) {
    auto tensors = read_tensor_container(path);
    std::map<std::string, NamedTensor*> by_name;
    for (auto& t : tensors) by_name[t.name] = &t;

    auto get = [&by_name, &path](const std::string& name) -> NamedTensor& {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw std::runtime_error("weight container " + path.string() + " missing tensor " + name);
        if (it->second->dims.size() != 3)
            throw std::runtime_error("weight container: tensor " + name + " is not rank 3");
        return *it->second;
    };

    // Channel counts are recovered from the stored shapes.
    RefineConfig cfg;
    cfg.proj_channels = static_cast<int>(get("proj1.bias").dims[0]);
    cfg.hidden_channels = static_cast<int>(get("wz.bias").dims[0]);
    int gru_in = static_cast<int>(get("wz.depthwise").dims[0]);
    cfg.context_channels = gru_in - cfg.hidden_channels - cfg.proj_channels;
    if (cfg.context_channels < 1)
        throw std::runtime_error("weight container: inconsistent channel counts");

    GruWeights w = GruWeights::zeros(cfg);
    for (auto [name, p] : w.named_params()) {
        NamedTensor& t = get(name);
        if (t.data.size() != p->size())
            throw std::runtime_error("weight container: shape mismatch for " + name);
        p->values() = t.data;
    }
    if (by_name.count("init_proj")) {
        NamedTensor& t = get("init_proj");
        w.init_proj = DiffTensor::leaf(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                       static_cast<int>(t.dims[2]), t.data);
    }
    if (cfg_out) *cfg_out = cfg;
    return w;
}

}  // namespace ndg
