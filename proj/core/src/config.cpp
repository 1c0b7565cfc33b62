#include "ndg/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ndg {

void RunConfig::validate() const {
    loss.validate();
    refine.validate();
    if (!(felz_k > 0.0)) throw std::invalid_argument("config: felz_k must be positive");
    if (min_region_size < 0) throw std::invalid_argument("config: min_region_size must be >= 0");
    if (!(tau_den > 0.0)) throw std::invalid_argument("config: tau_den must be positive");
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "lambda1=" << loss.lambda1 << "\nlambda2=" << loss.lambda2
       << "\nlambda3=" << loss.lambda3 << "\nlambda4=" << loss.lambda4
       << "\nlambda5=" << loss.lambda5 << "\nkappa=" << loss.kappa << "\neta=" << loss.eta
       << "\ngamma=" << loss.gamma << "\nm_steps=" << loss.m_steps
       << "\nb_tolerance=" << loss.b_tolerance << "\nfelz_k=" << felz_k
       << "\nmin_region_size=" << min_region_size << "\ntau_den=" << tau_den
       << "\nproj_channels=" << refine.proj_channels
       << "\ncontext_channels=" << refine.context_channels
       << "\nhidden_channels=" << refine.hidden_channels << "\nt_max=" << refine.t_max
       << "\ndepth_floor=" << refine.depth_floor << "\nseed=" << seed << "\n";
    return os.str();
}

std::map<std::string, std::string> parse_key_value(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key or value");
        kv[key] = val;
    }
    return kv;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, val] : kv) {
        auto d = [&val] { return std::stod(val); };
        auto i = [&val] { return std::stoi(val); };
        if (key == "lambda1") cfg.loss.lambda1 = d();
        else if (key == "lambda2") cfg.loss.lambda2 = d();
        else if (key == "lambda3") cfg.loss.lambda3 = d();
        else if (key == "lambda4") cfg.loss.lambda4 = d();
        else if (key == "lambda5") cfg.loss.lambda5 = d();
        else if (key == "kappa") cfg.loss.kappa = d();
        else if (key == "eta") cfg.loss.eta = d();
        else if (key == "gamma") cfg.loss.gamma = d();
        else if (key == "m_steps") cfg.loss.m_steps = i();
        else if (key == "b_tolerance") cfg.loss.b_tolerance = d();
        else if (key == "felz_k") cfg.felz_k = d();
        else if (key == "min_region_size") cfg.min_region_size = i();
        else if (key == "tau_den") cfg.tau_den = d();
        else if (key == "proj_channels") cfg.refine.proj_channels = i();
        else if (key == "context_channels") cfg.refine.context_channels = i();
        else if (key == "hidden_channels") cfg.refine.hidden_channels = i();
        else if (key == "t_max") cfg.refine.t_max = i();
        else if (key == "depth_floor") cfg.refine.depth_floor = d();
        else if (key == "seed") cfg.seed = std::stoull(val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    RunConfig cfg;
    apply_config(cfg, parse_key_value(ss.str()));
    return cfg;
}

}  // namespace ndg
