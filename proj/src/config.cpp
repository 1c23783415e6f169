#include "gsac/config.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <set>
#include <sstream>

namespace gsac {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"env", {"kind", "grid_size", "omega_grid", "source_omegas", "target_omega", "deadline", "queue_cap",
                 "env_seed"}},
        {"algo", {"method", "kappa", "K", "T", "T_e", "T_a", "critic_schedule", "alpha", "h", "t0",
                  "actor_schedule", "eta", "tau", "gamma", "theta_max", "lambda", "acr_free", "warm_start",
                  "eval_episodes", "fine_tune_budget"}},
        {"run", {"seeds", "out_dir", "log_wall_time"}},
    };
    return keys;
}

std::string trim(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& raw)
{
    std::istringstream is(trim(raw));
    T v{};
    is >> v;
    if (is.fail() || !is.eof())
        throw ConfigError("config key '" + key + "': cannot parse '" + raw + "'");
    return v;
}

template <typename T>
std::vector<T> number_list(const std::string& key, const std::string& raw)
{
    std::vector<T> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(number<T>(key, item));
    return out;
}

bool boolean(const std::string& key, const std::string& raw)
{
    std::string v = trim(raw);
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + raw + "'");
}

bool schedule(const std::string& key, const std::string& raw)
{
    std::string v = trim(raw);
    if (v == "decaying")
        return true;
    if (v == "constant")
        return false;
    throw ConfigError("config key '" + key + "': expected constant or decaying, got '" + raw + "'");
}

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (size_t k = 0; k < v.size(); ++k)
        out += (k ? "," : "") + fmt::format("{}", v[k]);
    return out;
}

std::string join(const std::vector<uint64_t>& v)
{
    std::string out;
    for (size_t k = 0; k < v.size(); ++k)
        out += (k ? "," : "") + std::to_string(v[k]);
    return out;
}

} // namespace

int default_iterations(int grid_size)
{
    return grid_size <= 3 ? 50000 : 50000 + 25000 * (grid_size - 3);
}

ExperimentConfig parse_config(const std::string& text)
{
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    ExperimentConfig c;
    bool k_given = false;
    for (const auto& [section, body] : tree) {
        auto known = known_keys().find(section);
        if (known == known_keys().end())
            throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty() && body.empty())
            throw ConfigError("config key '" + section + "' must live inside a section");
        for (const auto& [key, node] : body) {
            if (!known->second.count(key))
                throw ConfigError("unknown config key '" + section + "." + key + "'");
            std::string name = section + "." + key;
            const std::string& v = node.data();
            if (section == "env") {
                if (key == "kind")
                    c.env_kind = trim(v);
                else if (key == "grid_size")
                    c.grid_size = number<int>(name, v);
                else if (key == "omega_grid")
                    c.omega_grid = number_list<double>(name, v);
                else if (key == "source_omegas")
                    c.source_omegas = number_list<double>(name, v);
                else if (key == "target_omega")
                    c.target_omega = number<double>(name, v);
                else if (key == "deadline")
                    c.deadline = number<int>(name, v);
                else if (key == "queue_cap")
                    c.queue_cap = number<int>(name, v);
                else if (key == "env_seed")
                    c.env_seed = number<uint64_t>(name, v);
            } else if (section == "algo") {
                if (key == "method")
                    c.method = parse_method(trim(v));
                else if (key == "kappa")
                    c.kappa = number<int>(name, v);
                else if (key == "K") {
                    c.K = number<int>(name, v);
                    k_given = true;
                } else if (key == "T")
                    c.T = number<int>(name, v);
                else if (key == "T_e")
                    c.T_e = number<int>(name, v);
                else if (key == "T_a")
                    c.T_a = number<int>(name, v);
                else if (key == "critic_schedule")
                    c.critic_decaying = schedule(name, v);
                else if (key == "alpha")
                    c.alpha = number<double>(name, v);
                else if (key == "h")
                    c.h = number<double>(name, v);
                else if (key == "t0")
                    c.t0 = number<double>(name, v);
                else if (key == "actor_schedule")
                    c.actor_decaying = schedule(name, v);
                else if (key == "eta")
                    c.eta = number<double>(name, v);
                else if (key == "tau")
                    c.tau = number<double>(name, v);
                else if (key == "gamma")
                    c.gamma = number<double>(name, v);
                else if (key == "theta_max")
                    c.theta_max = number<double>(name, v);
                else if (key == "lambda")
                    c.lambda = number<double>(name, v);
                else if (key == "acr_free")
                    c.acr_free = boolean(name, v);
                else if (key == "warm_start")
                    c.warm_start = boolean(name, v);
                else if (key == "eval_episodes")
                    c.eval_episodes = number<int>(name, v);
                else if (key == "fine_tune_budget")
                    c.fine_tune_budget = number<int>(name, v);
            } else {
                if (key == "seeds")
                    c.seeds = number_list<uint64_t>(name, v);
                else if (key == "out_dir")
                    c.out_dir = trim(v);
                else if (key == "log_wall_time")
                    c.log_wall_time = boolean(name, v);
            }
        }
    }
    if (!k_given)
        c.K = default_iterations(c.grid_size);
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& c)
{
    std::string s;
    s += "[env]\n";
    s += "kind = " + c.env_kind + "\n";
    s += fmt::format("grid_size = {}\n", c.grid_size);
    s += "omega_grid = " + join(c.omega_grid) + "\n";
    s += "source_omegas = " + join(c.source_omegas) + "\n";
    s += fmt::format("target_omega = {}\n", c.target_omega);
    s += fmt::format("deadline = {}\n", c.deadline);
    s += fmt::format("queue_cap = {}\n", c.queue_cap);
    s += fmt::format("env_seed = {}\n", c.env_seed);
    s += "\n[algo]\n";
    s += "method = " + method_name(c.method) + "\n";
    s += fmt::format("kappa = {}\n", c.kappa);
    s += fmt::format("K = {}\n", c.K);
    s += fmt::format("T = {}\n", c.T);
    s += fmt::format("T_e = {}\n", c.T_e);
    s += fmt::format("T_a = {}\n", c.T_a);
    s += fmt::format("critic_schedule = {}\n", c.critic_decaying ? "decaying" : "constant");
    s += fmt::format("alpha = {}\n", c.alpha);
    s += fmt::format("h = {}\n", c.h);
    s += fmt::format("t0 = {}\n", c.t0);
    s += fmt::format("actor_schedule = {}\n", c.actor_decaying ? "decaying" : "constant");
    s += fmt::format("eta = {}\n", c.eta);
    s += fmt::format("tau = {}\n", c.tau);
    s += fmt::format("gamma = {}\n", c.gamma);
    s += fmt::format("theta_max = {}\n", c.theta_max);
    s += fmt::format("lambda = {}\n", c.lambda);
    s += fmt::format("acr_free = {}\n", c.acr_free);
    s += fmt::format("warm_start = {}\n", c.warm_start);
    s += fmt::format("eval_episodes = {}\n", c.eval_episodes);
    s += fmt::format("fine_tune_budget = {}\n", c.fine_tune_budget);
    s += "\n[run]\n";
    s += "seeds = " + join(c.seeds) + "\n";
    s += "out_dir = " + c.out_dir + "\n";
    s += fmt::format("log_wall_time = {}\n", c.log_wall_time);
    return s;
}

void validate_config(const ExperimentConfig& c)
{
    auto fail = [](const std::string& m) { throw ConfigError("invalid config: " + m); };
    if (c.env_kind != "wireless" && c.env_kind != "traffic")
        fail("env.kind must be wireless or traffic");
    if (c.grid_size < 1)
        fail("env.grid_size must be >= 1");
    if (c.omega_grid.empty())
        fail("env.omega_grid must not be empty");
    for (size_t k = 0; k < c.omega_grid.size(); ++k) {
        if (!(c.omega_grid[k] >= 0.0 && c.omega_grid[k] <= 1.0))
            fail("env.omega_grid values must lie in [0,1]");
        if (k > 0 && !(c.omega_grid[k] > c.omega_grid[k - 1]))
            fail("env.omega_grid must be strictly increasing");
    }
    if (c.source_omegas.empty())
        fail("env.source_omegas must not be empty");
    for (double w : c.source_omegas)
        if (!(w >= 0.0 && w <= 1.0))
            fail("env.source_omegas values must lie in [0,1]");
    if (!(c.target_omega >= 0.0 && c.target_omega <= 1.0))
        fail("env.target_omega must lie in [0,1]");
    if (c.deadline < 1)
        fail("env.deadline must be >= 1");
    if (c.queue_cap < 1)
        fail("env.queue_cap must be >= 1");
    if (c.kappa < 0)
        fail("algo.kappa must be >= 0");
    if (c.K < 0)
        fail("algo.K must be >= 0");
    if (c.T < 1)
        fail("algo.T must be >= 1");
    if (c.T_e < 1)
        fail("algo.T_e must be >= 1");
    if (c.T_a < 1)
        fail("algo.T_a must be >= 1");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0))
        fail("algo.alpha must lie in (0,1]");
    if (!(c.h > 0.0) || !(c.t0 > 0.0))
        fail("algo.h and algo.t0 must be positive");
    if (!(c.eta > 0.0))
        fail("algo.eta must be positive");
    if (!(c.tau > 0.0))
        fail("algo.tau must be positive");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0))
        fail("algo.gamma must lie in [0,1)");
    if (!(c.theta_max > 0.0))
        fail("algo.theta_max must be positive");
    if (!(c.lambda >= 0.0))
        fail("algo.lambda must be non-negative");
    if (c.eval_episodes < 1)
        fail("algo.eval_episodes must be >= 1");
    if (c.seeds.empty())
        fail("run.seeds must not be empty");
    if (c.out_dir.empty())
        fail("run.out_dir must not be empty");
}

std::string config_hash(const ExperimentConfig& cfg)
{
    std::string text = to_ini(cfg);
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    return fmt::format("{:08x}", crc.checksum());
}

TrainingSettings training_settings(const ExperimentConfig& c)
{
    TrainingSettings s;
    s.K = c.K;
    s.T = c.T;
    s.gamma = c.gamma;
    s.tau = c.tau;
    s.theta_max = c.theta_max;
    s.critic = {c.critic_decaying, c.alpha, c.h, c.t0};
    s.actor = {c.actor_decaying, c.eta};
    s.warm_start = c.warm_start;
    s.record_wall_time = c.log_wall_time;
    return s;
}

} // namespace gsac
