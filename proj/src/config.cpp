#include "config.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace idrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_str) {
      ++i;
    } else if (line[i] == '"') {
      in_str = !in_str;
    } else if (line[i] == '#' && !in_str) {
      return line.substr(0, i);
    }
  }
  return line;
}

double parse_number(const std::string& s, int line) {
  std::string t;
  for (char c : s)
    if (c != '_') t.push_back(c);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ValidationError("config line " + std::to_string(line) + ": cannot parse value '" + s + "'");
  return v;
}

TomlValue parse_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty()) throw ValidationError("config line " + std::to_string(line) + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ValidationError("config line " + std::to_string(line) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char c = v[++i];
        out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') throw ValidationError("config line " + std::to_string(line) + ": unterminated array");
    std::vector<double> arr;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      arr.push_back(parse_number(trim(item), line));
    }
    return arr;
  }
  return parse_number(v, line);
}

std::string fmt_num(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string fmt_int(long v) { return std::to_string(v); }

std::string fmt_widths(const std::vector<int>& w) {
  std::string s = "[";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ", " : "") + std::to_string(w[i]);
  return s + "]";
}

std::string fmt_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

class Section {
 public:
  Section(const TomlTable& t, const std::string& name) : name_(name) {
    if (auto it = t.find(name); it != t.end()) values_ = &it->second;
  }

  const TomlValue* find(const std::string& key) {
    if (!values_) return nullptr;
    auto it = values_->find(key);
    if (it == values_->end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  double number(const std::string& key, double def) {
    const TomlValue* v = find(key);
    if (!v) return def;
    if (auto d = std::get_if<double>(v)) return *d;
    throw ValidationError(where(key) + " must be a number");
  }

  long integer(const std::string& key, long def) {
    const double d = number(key, static_cast<double>(def));
    if (d != std::floor(d) || std::abs(d) > 9007199254740992.0) throw ValidationError(where(key) + " must be an integer");
    return static_cast<long>(d);
  }

  bool boolean(const std::string& key, bool def) {
    const TomlValue* v = find(key);
    if (!v) return def;
    if (auto b = std::get_if<bool>(v)) return *b;
    throw ValidationError(where(key) + " must be true or false");
  }

  std::string string(const std::string& key, const std::string& def) {
    const TomlValue* v = find(key);
    if (!v) return def;
    if (auto s = std::get_if<std::string>(v)) return *s;
    throw ValidationError(where(key) + " must be a string");
  }

  std::vector<int> widths(const std::string& key, const std::vector<int>& def) {
    const TomlValue* v = find(key);
    if (!v) return def;
    auto arr = std::get_if<std::vector<double>>(v);
    if (!arr) throw ValidationError(where(key) + " must be an array of layer widths");
    std::vector<int> out;
    for (double d : *arr) {
      if (d != std::floor(d) || d < 1) throw ValidationError(where(key) + " entries must be positive integers");
      out.push_back(static_cast<int>(d));
    }
    return out;
  }

  // Every key not consumed so far.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    if (values_)
      for (const auto& [k, v] : *values_)
        if (!used_.contains(k)) out.push_back(k);
    return out;
  }

  void reject_unused() const {
    for (const auto& k : unused()) throw ValidationError("unknown config key [" + name_ + "] " + k);
  }

 private:
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::string name_;
  const std::map<std::string, TomlValue>* values_ = nullptr;
  std::set<std::string> used_;
};

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable t;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = trim(strip_comment(raw));
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ValidationError("config line " + std::to_string(line) + ": bad section header");
      section = trim(l.substr(1, l.size() - 2));
      if (section.empty()) throw ValidationError("config line " + std::to_string(line) + ": empty section name");
      t[section];
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(l.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(line) + ": empty key");
    auto& sec = t[section];
    if (sec.contains(key)) throw ValidationError("config line " + std::to_string(line) + ": duplicate key " + key);
    sec[key] = parse_value(l.substr(eq + 1), line);
  }
  return t;
}

RunConfig parse_config(const std::string& text, bool apply_env_seed) {
  const TomlTable t = parse_toml(text);
  for (const auto& [name, values] : t)
    if (name != "run" && name != "env" && name != "agent" && name != "disc" && name != "bc" && name != "expert" &&
        name != "certify")
      throw ValidationError("unknown config section [" + name + "]");

  RunConfig c;
  Section run(t, "run");
  c.seed = static_cast<std::uint64_t>(run.integer("seed", 0));
  c.total_steps = run.integer("total_steps", c.total_steps);
  c.eval_interval = run.integer("eval_interval", c.eval_interval);
  c.eval_episodes = static_cast<int>(run.integer("eval_episodes", c.eval_episodes));
  c.warmup_steps = run.integer("warmup_steps", c.warmup_steps);
  c.batch_size = static_cast<int>(run.integer("batch_size", c.batch_size));
  c.buffer_capacity = run.integer("buffer_capacity", c.buffer_capacity);
  c.checkpoint_interval = run.integer("checkpoint_interval", c.checkpoint_interval);
  c.disc_updates = static_cast<int>(run.integer("disc_updates", c.disc_updates));
  c.policy_updates = static_cast<int>(run.integer("policy_updates", c.policy_updates));
  c.expert_path = run.string("expert_path", c.expert_path);
  run.reject_unused();

  Section env(t, "env");
  c.env_id = env.string("id", c.env_id);
  c.delay = static_cast<int>(env.integer("delay", c.delay));
  for (const auto& key : env.unused()) c.env_params[key] = env.number(key, 0.0);

  Section agent(t, "agent");
  c.delay_tau = static_cast<int>(agent.integer("delay_tau", c.delay_tau));
  c.n_step = static_cast<int>(agent.integer("n_step", c.n_step));
  c.agent.actor_hidden = agent.widths("actor_hidden", c.agent.actor_hidden);
  c.agent.critic_hidden = agent.widths("critic_hidden", c.agent.critic_hidden);
  c.agent.lr = agent.number("lr", c.agent.lr);
  c.agent.alpha = agent.number("alpha", c.agent.alpha);
  c.agent.polyak = agent.number("polyak", c.agent.polyak);
  c.agent.squash = agent.boolean("squash", c.agent.squash);
  agent.reject_unused();

  Section disc(t, "disc");
  c.disc.hidden = disc.widths("hidden", c.disc.hidden);
  c.disc.lr = disc.number("lr", c.disc.lr);
  c.disc.lambda_gp = disc.number("lambda_gp", c.disc.lambda_gp);
  c.disc.lambda_ent = disc.number("lambda_ent", c.disc.lambda_ent);
  c.disc.delta = disc.number("delta", c.disc.delta);
  disc.reject_unused();

  Section bc(t, "bc");
  c.bc.hidden = bc.widths("hidden", c.bc.hidden);
  c.bc.lr = bc.number("lr", c.bc.lr);
  c.bc.epochs = static_cast<int>(bc.integer("epochs", c.bc.epochs));
  c.bc.batch_size = static_cast<int>(bc.integer("batch_size", c.bc.batch_size));
  bc.reject_unused();

  Section expert(t, "expert");
  c.expert.total_steps = expert.integer("total_steps", c.expert.total_steps);
  c.expert.trajectories = static_cast<int>(expert.integer("trajectories", c.expert.trajectories));
  c.expert.deterministic = expert.boolean("deterministic", c.expert.deterministic);
  expert.reject_unused();

  Section cert(t, "certify");
  c.certify.n_mdps = static_cast<int>(cert.integer("n_mdps", c.certify.n_mdps));
  c.certify.max_states = static_cast<int>(cert.integer("max_states", c.certify.max_states));
  c.certify.max_actions = static_cast<int>(cert.integer("max_actions", c.certify.max_actions));
  c.certify.max_delay = static_cast<int>(cert.integer("max_delay", c.certify.max_delay));
  c.certify.gamma = cert.number("gamma", c.certify.gamma);
  c.certify.lt_scale = cert.number("lt_scale", c.certify.lt_scale);
  cert.reject_unused();

  if (apply_env_seed) {
    if (const char* s = std::getenv("IDRL_SEED"); s && *s) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(s, &end, 10);
      if (*end != '\0') throw ValidationError(std::string("IDRL_SEED is not an unsigned integer: ") + s);
      c.seed = v;
    }
  }
  c.resolve();
  return c;
}

RunConfig load_config(const std::string& path, bool apply_env_seed) {
  return parse_config(bin::read_file(path), apply_env_seed);
}

void RunConfig::resolve() {
  auto positive = [](long v, const char* name) {
    if (v < 1) throw ValidationError(std::string(name) + " must be >= 1");
  };
  if (total_steps < 0) throw ValidationError("[run] total_steps must be >= 0");
  if (warmup_steps < 0) throw ValidationError("[run] warmup_steps must be >= 0");
  if (checkpoint_interval < 0) throw ValidationError("[run] checkpoint_interval must be >= 0");
  if (disc_updates < 0) throw ValidationError("[run] disc_updates must be >= 0");
  positive(eval_interval, "[run] eval_interval");
  positive(eval_episodes, "[run] eval_episodes");
  positive(batch_size, "[run] batch_size");
  positive(buffer_capacity, "[run] buffer_capacity");
  positive(policy_updates, "[run] policy_updates");
  if (seed > (1ULL << 53)) throw ValidationError("seed must be <= 2^53");

  const auto env = make_env(env_id, env_params);  // validates id and parameters
  if (delay < 0) throw ValidationError("[env] delay must be >= 0");
  if (delay_tau < 0) delay_tau = std::min(1, delay);
  if (delay_tau > delay)
    throw ValidationError("[agent] delay_tau = " + std::to_string(delay_tau) + " exceeds [env] delay = " +
                          std::to_string(delay));
  if (n_step < 0) n_step = std::max(1, delay - delay_tau);
  positive(n_step, "[agent] n_step");
  agent.gamma = env->spec().gamma;
  if (!(agent.lr > 0)) throw ValidationError("[agent] lr must be positive");
  if (agent.alpha < 0) throw ValidationError("[agent] alpha must be >= 0");
  if (agent.polyak < 0 || agent.polyak > 1) throw ValidationError("[agent] polyak must lie in [0, 1]");
  if (!(disc.lr > 0)) throw ValidationError("[disc] lr must be positive");
  if (disc.lambda_gp < 0 || disc.lambda_ent < 0 || disc.delta < 0)
    throw ValidationError("[disc] lambda_gp, lambda_ent and delta must be >= 0");
  if (!(bc.lr > 0)) throw ValidationError("[bc] lr must be positive");
  if (bc.epochs < 0) throw ValidationError("[bc] epochs must be >= 0");
  positive(bc.batch_size, "[bc] batch_size");
  if (expert.total_steps < 0) throw ValidationError("[expert] total_steps must be >= 0");
  positive(expert.trajectories, "[expert] trajectories");
  certify.seed = seed;
}

std::string RunConfig::to_toml() const {
  std::ostringstream o;
  o << "[run]\n"
    << "seed = " << seed << "\n"
    << "total_steps = " << fmt_int(total_steps) << "\n"
    << "eval_interval = " << fmt_int(eval_interval) << "\n"
    << "eval_episodes = " << eval_episodes << "\n"
    << "warmup_steps = " << fmt_int(warmup_steps) << "\n"
    << "batch_size = " << batch_size << "\n"
    << "buffer_capacity = " << fmt_int(buffer_capacity) << "\n"
    << "checkpoint_interval = " << fmt_int(checkpoint_interval) << "\n"
    << "disc_updates = " << disc_updates << "\n"
    << "policy_updates = " << policy_updates << "\n"
    << "expert_path = " << fmt_str(expert_path) << "\n\n";

  o << "[env]\n"
    << "id = " << fmt_str(env_id) << "\n"
    << "delay = " << delay << "\n";
  EnvParams p = default_env_params(env_id);
  for (const auto& [k, v] : env_params) p[k] = v;
  for (const auto& [k, v] : p) o << k << " = " << fmt_num(v) << "\n";

  o << "\n[agent]\n"
    << "delay_tau = " << delay_tau << "\n"
    << "n_step = " << n_step << "\n"
    << "actor_hidden = " << fmt_widths(agent.actor_hidden) << "\n"
    << "critic_hidden = " << fmt_widths(agent.critic_hidden) << "\n"
    << "lr = " << fmt_num(agent.lr) << "\n"
    << "alpha = " << fmt_num(agent.alpha) << "\n"
    << "polyak = " << fmt_num(agent.polyak) << "\n"
    << "squash = " << (agent.squash ? "true" : "false") << "\n";

  o << "\n[disc]\n"
    << "hidden = " << fmt_widths(disc.hidden) << "\n"
    << "lr = " << fmt_num(disc.lr) << "\n"
    << "lambda_gp = " << fmt_num(disc.lambda_gp) << "\n"
    << "lambda_ent = " << fmt_num(disc.lambda_ent) << "\n"
    << "delta = " << fmt_num(disc.delta) << "\n";

  o << "\n[bc]\n"
    << "hidden = " << fmt_widths(bc.hidden) << "\n"
    << "lr = " << fmt_num(bc.lr) << "\n"
    << "epochs = " << bc.epochs << "\n"
    << "batch_size = " << bc.batch_size << "\n";

  o << "\n[expert]\n"
    << "total_steps = " << fmt_int(expert.total_steps) << "\n"
    << "trajectories = " << expert.trajectories << "\n"
    << "deterministic = " << (expert.deterministic ? "true" : "false") << "\n";

  o << "\n[certify]\n"
    << "n_mdps = " << certify.n_mdps << "\n"
    << "max_states = " << certify.max_states << "\n"
    << "max_actions = " << certify.max_actions << "\n"
    << "max_delay = " << certify.max_delay << "\n"
    << "gamma = " << fmt_num(certify.gamma) << "\n"
    << "lt_scale = " << fmt_num(certify.lt_scale) << "\n";
  return o.str();
}

}  // namespace idrl
