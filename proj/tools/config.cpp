#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smolu/error.hpp"

namespace smolu::tools {

using nlohmann::json;

namespace {

// Character iterator that counts the newlines it has stepped over, so a SAX
// callback can read the line of the token just consumed.
struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  int* line = nullptr;

  reference operator*() const { return *p; }
  CountingIterator& operator++() {
    if (*p == '\n') ++*line;
    ++p;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

// Records the line of every object key and array element by JSON pointer.
class LineSax {
 public:
  LineSax(const int* line, std::map<std::string, int>* lines) : line_(line), lines_(lines) {}

  bool null() { return value(); }
  bool boolean(bool) { return value(); }
  bool number_integer(json::number_integer_t) { return value(); }
  bool number_unsigned(json::number_unsigned_t) { return value(); }
  bool number_float(json::number_float_t, const std::string&) { return value(); }
  bool string(std::string&) { return value(); }
  bool binary(json::binary_t&) { return value(); }
  bool start_object(std::size_t) {
    value();
    stack_.push_back({false, 0, {}});
    return true;
  }
  bool end_object() {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    value();
    stack_.push_back({true, 0, {}});
    return true;
  }
  bool end_array() {
    stack_.pop_back();
    return true;
  }
  bool key(std::string& k) {
    stack_.back().key = k;
    (*lines_)[path() + "/" + k] = *line_;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) {
    return false;
  }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };

  std::string path() const {
    std::string s;
    for (const auto& f : stack_) {
      // the frame's own element/key is appended by the caller
      if (&f == &stack_.back()) break;
      s += "/" + (f.array ? std::to_string(f.index - 1) : f.key);
    }
    return s;
  }

  bool value() {
    if (!stack_.empty() && stack_.back().array) {
      (*lines_)[path() + "/" + std::to_string(stack_.back().index)] = *line_;
      ++stack_.back().index;
    }
    return true;
  }

  const int* line_;
  std::map<std::string, int>* lines_;
  std::vector<Frame> stack_;
};

class Node {
 public:
  Node(const json& j, std::string ptr, const std::map<std::string, int>& lines, const std::string& source)
      : j_(j), ptr_(std::move(ptr)), lines_(lines), source_(source) {}

  const json& raw() const { return j_; }
  const std::string& pointer() const { return ptr_; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(ptr_, msg); }

  [[noreturn]] void fail_at(const std::string& ptr, const std::string& msg) const {
    int line = 1;
    // walk up until some enclosing key has a recorded line
    for (std::string p = ptr; !p.empty(); p = p.substr(0, p.rfind('/'))) {
      const auto it = lines_.find(p);
      if (it != lines_.end()) {
        line = it->second;
        break;
      }
    }
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + dotted(ptr) + ": " + msg);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Node child(const std::string& key) const {
    return {j_.at(key), ptr_ + "/" + key, lines_, source_};
  }

  Node object(const std::string& key) const {
    const Node c = child(key);
    if (!c.j_.is_object()) c.fail("expected an object");
    return c;
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail_at(ptr_ + "/" + k, "unknown key");
  }

  double number(const std::string& key, double def) const {
    if (!has(key)) return def;
    const Node c = child(key);
    if (!c.j_.is_number()) c.fail("expected a number");
    return c.j_.get<double>();
  }

  double number(const std::string& key, double def, const std::function<bool(double)>& ok,
                const std::string& requirement) const {
    const double v = number(key, def);
    if (!ok(v)) {
      std::ostringstream os;
      os << "value " << v << " must be " << requirement;
      if (has(key)) child(key).fail(os.str());
      fail(os.str());
    }
    return v;
  }

  long long integer(const std::string& key, long long def, long long lo) const {
    if (!has(key)) return def;
    const Node c = child(key);
    if (!c.j_.is_number_integer()) c.fail("expected an integer");
    const long long v = c.j_.get<long long>();
    if (v < lo) c.fail("value " + std::to_string(v) + " must be >= " + std::to_string(lo));
    return v;
  }

  std::string text(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const Node c = child(key);
    if (!c.j_.is_string()) c.fail("expected a string");
    return c.j_.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const Node c = child(key);
    if (!c.j_.is_array()) c.fail("expected an array of numbers");
    for (std::size_t i = 0; i < c.j_.size(); ++i) {
      if (!c.j_[i].is_number()) c.fail_at(c.ptr_ + "/" + std::to_string(i), "expected a number");
      out.push_back(c.j_[i].get<double>());
    }
    return out;
  }

  std::vector<Node> elements(const std::string& key) const {
    std::vector<Node> out;
    const Node c = child(key);
    if (!c.j_.is_array()) c.fail("expected an array");
    for (std::size_t i = 0; i < c.j_.size(); ++i)
      out.push_back({c.j_[i], c.ptr_ + "/" + std::to_string(i), lines_, source_});
    return out;
  }

 private:
  static std::string dotted(const std::string& ptr) {
    if (ptr.empty()) return "(root)";
    std::string s = ptr.substr(1);
    std::replace(s.begin(), s.end(), '/', '.');
    return s;
  }

  const json& j_;
  std::string ptr_;
  const std::map<std::string, int>& lines_;
  const std::string& source_;
};

bool positive(double v) { return v > 0.0; }
bool nonnegative(double v) { return v >= 0.0; }

void read_kernel(const Node& k, RunConfig& c) {
  k.allow({"form", "a", "b", "c1", "c2", "C", "epsilon", "lambda"});
  const std::string form = k.text("form", "classical");
  if (form == "classical") {
    KernelSpec spec = KernelSpec::classical();
    for (const char* key : {"a", "b"})
      if (k.has(key) && std::abs(k.number(key, 0.0) - 1.0 / 3.0) > 1e-12)
        k.child(key).fail("the classical kernel has a = b = 1/3");
    if (k.has("C")) k.child("C").fail("C applies to product_envelope only");
    spec.c1 = k.number("c1", spec.c1, positive, "positive");
    spec.c2 = k.number("c2", spec.c2, positive, "positive");
    c.kernel = spec;
  } else if (form == "product_envelope") {
    const double a = k.number("a", 1.0 / 3.0, positive, "positive");
    const double b = k.number("b", 1.0 / 3.0, [](double v) { return v < 1.0; }, "below 1");
    const double C = k.number("C", 1.0, positive, "positive");
    if (k.has("c1") || k.has("c2")) k.fail("c1 and c2 equal C for product_envelope");
    c.kernel = KernelSpec::product_envelope(a, b, C);
  } else if (form == "custom") {
    k.child("form").fail("custom kernels can only be built through the library API");
  } else {
    k.child("form").fail("unknown form '" + form + "' (classical | product_envelope)");
  }
  if (!(c.kernel.c1 <= c.kernel.c2)) k.fail("needs c1 <= c2");
}

void read_regularization(const Node& root, RunConfig& c) {
  // epsilon and lambda may sit in the kernel block or in regularization, not both
  std::optional<Node> reg;
  if (root.has("regularization")) {
    reg.emplace(root.object("regularization"));
    reg->allow({"epsilon", "lambda", "transition_width_ratio"});
  }
  std::optional<Node> kern;
  if (root.has("kernel")) kern.emplace(root.object("kernel"));
  for (const char* key : {"epsilon", "lambda"}) {
    const bool in_reg = reg && reg->has(key);
    const bool in_kernel = kern && kern->has(key);
    if (in_reg && in_kernel) kern->child(key).fail("also given in regularization");
    const Node* src = in_reg ? &*reg : (in_kernel ? &*kern : nullptr);
    const double v = src ? src->number(key, 0.0, nonnegative, "nonnegative") : 0.0;
    (std::string(key) == "epsilon" ? c.reg.epsilon : c.reg.lambda) = v;
  }
  if (reg)
    c.reg.transition_width_ratio = reg->number("transition_width_ratio", 0.5,
                                               [](double v) { return v > 0.0 && v <= 0.5; }, "in (0, 0.5]");
}

void read_params(const Node& p, RunConfig& c) {
  p.allow({"rho", "grid", "invariant_set"});
  const double lo = std::max(c.kernel.b, 0.0);
  std::ostringstream req;
  req << "inside the admissible interval (max(b,0), 1) = (" << lo << ", 1)";
  c.rho = p.number("rho", 0.5, [&](double r) { return r > lo && r < 1.0 && r + c.kernel.a > 0.0; },
                   req.str());
  if (p.has("grid")) {
    const Node g = p.object("grid");
    g.allow({"x_min", "x_max", "n"});
    c.grid.x_min = g.number("x_min", c.grid.x_min, positive, "positive");
    c.grid.x_max = g.number("x_max", c.grid.x_max, [&](double v) { return v > c.grid.x_min; },
                            "above x_min");
    c.grid.n = static_cast<std::size_t>(g.integer("n", static_cast<long long>(c.grid.n), 16));
  }
  if (p.has("invariant_set")) {
    const Node s = p.object("invariant_set");
    s.allow({"r0", "delta"});
    c.invariant.r0 = s.number("r0", c.invariant.r0, [](double v) { return v >= 1.0; }, ">= 1");
    c.invariant.delta = s.number("delta", c.invariant.delta, [](double v) { return v > 0.0 && v < 1.0; },
                                 "in (0, 1)");
  }
}

void read_solver(const Node& s, RunConfig& c) {
  s.allow({"mode", "tol", "relax", "T_max", "dt_max", "n_steps", "T"});
  const std::string mode = s.text("mode", "direct");
  if (mode == "direct") {
    c.solver.mode = SolveMode::Direct;
  } else if (mode == "evolve") {
    c.solver.mode = SolveMode::Evolve;
  } else {
    s.child("mode").fail("unknown mode '" + mode + "' (evolve | direct)");
  }
  c.solver.tol = s.number("tol", c.solver.tol, positive, "positive");
  c.solver.relax = s.number("relax", c.solver.relax, [](double v) { return v > 0.0 && v <= 1.0; },
                            "in (0, 1]");
  c.solver.T_max = s.number("T_max", c.solver.T_max, positive, "positive");
  c.solver.dt_max = s.number("dt_max", c.solver.dt_max, positive, "positive");
  c.solver.n_steps = static_cast<int>(s.integer("n_steps", 0, 0));
  c.solver.T = s.number("T", 0.0, nonnegative, "nonnegative");
  if (c.solver.n_steps > 0 && !(c.solver.T > 0.0)) s.fail("n_steps needs a positive T");
  if (c.solver.n_steps > 0 && c.solver.mode != SolveMode::Evolve)
    s.child("n_steps").fail("fixed-step runs need mode evolve");
}

void read_sweep(const Node& s, RunConfig& c) {
  s.allow({"eps_list", "lambda_list"});
  c.sweep.eps_list = s.numbers("eps_list");
  c.sweep.lambda_list = s.numbers("lambda_list");
  if (c.sweep.eps_list.empty()) s.fail("eps_list must not be empty");
  for (std::size_t i = 0; i < c.sweep.eps_list.size(); ++i) {
    const std::string at = s.pointer() + "/eps_list/" + std::to_string(i);
    if (!(c.sweep.eps_list[i] > 0.0)) s.fail_at(at, "epsilon must be positive");
    if (i > 0 && !(c.sweep.eps_list[i] < c.sweep.eps_list[i - 1])) s.fail_at(at, "eps_list must be strictly decreasing");
  }
  if (c.sweep.lambda_list.empty()) c.sweep.lambda_list = {c.reg.lambda};
  if (c.sweep.lambda_list.size() != 1 && c.sweep.lambda_list.size() != c.sweep.eps_list.size())
    s.child("lambda_list").fail("needs one entry or one per epsilon");
  for (std::size_t i = 0; i < c.sweep.lambda_list.size(); ++i)
    if (c.sweep.lambda_list[i] < 0.0)
      s.fail_at(s.pointer() + "/lambda_list/" + std::to_string(i), "lambda must be nonnegative");
}

void read_dual(const Node& d, RunConfig& c) {
  d.allow({"kind", "kernel_terms", "init", "times", "steps_per_unit", "grid", "moment_Z", "oracle_tol",
           "tail_D", "tail_mu", "R", "epsilon", "c0"});
  DualConfig dc;
  const std::string kind = d.text("kind", "jump");
  if (kind == "jump") {
    dc.kind = DualConfig::Kind::Jump;
    if (!d.has("kernel_terms")) d.fail("jump runs need kernel_terms");
    for (const Node& t : d.elements("kernel_terms")) {
      t.allow({"type", "prefactor", "omega"});
      const std::string type = t.text("type", "power_law");
      if (type != "power_law") t.child("type").fail("only power_law terms can be configured");
      dc.kernel.terms.push_back(PowerLawTerm{
          t.number("prefactor", 1.0, positive, "positive"),
          t.number("omega", 0.5, [](double w) { return w > 0.0 && w < 1.0; }, "in (0, 1)")});
    }
    if (dc.kernel.terms.empty()) d.child("kernel_terms").fail("needs at least one term");
  } else if (kind == "phi") {
    dc.kind = DualConfig::Kind::Phi;
    dc.step = true;
    dc.R = d.number("R", dc.R, [](double v) { return v >= 1.0; }, ">= 1");
    dc.phi_epsilon = d.number("epsilon", dc.phi_epsilon, [](double v) { return v > 0.0 && v <= 1.0; },
                              "in (0, 1]");
    dc.c0 = d.number("c0", dc.c0, positive, "positive");
  } else {
    d.child("kind").fail("unknown kind '" + kind + "' (jump | phi)");
  }
  if (d.has("init")) {
    const Node i = d.object("init");
    i.allow({"type", "A", "kappa", "n"});
    const std::string type = i.text("type", dc.step ? "step" : "delta");
    if (type != "delta" && type != "step") i.child("type").fail("unknown init type (delta | step)");
    if (dc.kind == DualConfig::Kind::Phi && type != "step") i.child("type").fail("phi runs start from a step");
    dc.step = type == "step";
    dc.A = i.number("A", dc.A);
    dc.kappa = i.number("kappa", dc.kappa, [](double v) { return v > 0.0 && v < 1.0; }, "in (0, 1)");
    dc.n_mollify = static_cast<int>(i.integer("n", dc.n_mollify, 1));
  }
  if (d.has("times")) {
    dc.times = d.numbers("times");
    if (dc.times.empty()) d.child("times").fail("needs at least one time");
    for (std::size_t i = 0; i < dc.times.size(); ++i)
      if (dc.times[i] < 0.0) d.fail_at(d.pointer() + "/times/" + std::to_string(i), "times must be nonnegative");
  }
  dc.steps_per_unit = static_cast<int>(d.integer("steps_per_unit", dc.steps_per_unit, 1));
  if (d.has("grid")) {
    const Node g = d.object("grid");
    g.allow({"n", "span"});
    dc.n = static_cast<std::size_t>(g.integer("n", static_cast<long long>(dc.n), 16));
    dc.span = g.number("span", dc.span, positive, "positive");
  }
  if (d.has("moment_Z")) dc.moment_Z = d.numbers("moment_Z");
  for (std::size_t i = 0; i < dc.moment_Z.size(); ++i)
    if (!(dc.moment_Z[i] > 0.0)) d.fail_at(d.pointer() + "/moment_Z/" + std::to_string(i), "Z must be positive");
  dc.oracle_tol = d.number("oracle_tol", dc.oracle_tol, positive, "positive");
  dc.tail_D = d.numbers("tail_D");
  for (std::size_t i = 0; i < dc.tail_D.size(); ++i)
    if (!(dc.tail_D[i] > 0.0)) d.fail_at(d.pointer() + "/tail_D/" + std::to_string(i), "D must be positive");
  dc.tail_mu = d.number("tail_mu", dc.tail_mu, [](double v) { return v > 0.0 && v < 1.0; }, "in (0, 1)");
  c.dual = dc;
}

}  // namespace

StationaryOptions RunConfig::stationary_options() const {
  StationaryOptions o;
  o.tol = solver.tol;
  o.relax = solver.relax;
  o.T_max = solver.T_max;
  o.picard.dt_max = solver.dt_max;
  o.dump_every = output.dump_every;
  return o;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, int> lines;
  int line = 1;
  LineSax sax(&line, &lines);
  json j;
  try {
    // first pass only maps keys to lines; the second builds the document
    json::sax_parse(CountingIterator{text.data(), &line}, CountingIterator{text.data() + text.size(), &line},
                    &sax);
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    const long ln = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n');
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(source + ":" + std::to_string(ln) + ": " + msg);
  }
  const Node root(j, "", lines, source);
  root.allow({"kernel", "params", "regularization", "solver", "sweep", "dual", "output", "verify"});

  RunConfig c;
  if (root.has("kernel")) read_kernel(root.object("kernel"), c);
  read_regularization(root, c);
  if (root.has("params")) {
    read_params(root.object("params"), c);
  } else {
    read_params(Node(json::object(), "/params", lines, source), c);
  }
  if (root.has("solver")) read_solver(root.object("solver"), c);
  if (root.has("sweep")) read_sweep(root.object("sweep"), c);
  if (root.has("dual")) read_dual(root.object("dual"), c);
  if (root.has("output")) {
    const Node o = root.object("output");
    o.allow({"dir", "dump_every"});
    c.output.dir = o.text("dir", c.output.dir);
    c.output.dump_every = static_cast<int>(o.integer("dump_every", 0, 0));
  }
  if (root.has("verify")) {
    const Node v = root.object("verify");
    v.allow({"only"});
    for (double x : v.numbers("only")) {
      if (x != std::floor(x) || x < 1 || x > 13) v.child("only").fail("criteria are numbered 1 to 13");
      c.verify_only.push_back(static_cast<int>(x));
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace smolu::tools
