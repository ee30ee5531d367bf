#include "plasthom/config.hpp"

#include "plasthom/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace plasthom {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config: '" + key + "': " + what);
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) fail(key, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) fail(key, "expected an integer");
    return j.get<int>();
}

SmallVector vector_of(const json& j, const std::string& key, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(key, "expected an array of " + std::to_string(dim) + " numbers");
    SmallVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = number(j[i], key);
    return v;
}

std::vector<double> numbers(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) fail(key, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, key));
    return out;
}

ParameterDistribution distribution(const json& j, const std::string& key) {
    if (j.is_number()) return ParameterDistribution::point(j.get<double>());
    if (!j.is_object() || j.size() != 1) fail(key, "expected {\"point\"|\"uniform\"|\"discrete\": ...}");
    try {
        if (j.contains("point")) return ParameterDistribution::point(number(j["point"], key + ".point"));
        if (j.contains("uniform")) {
            const auto v = numbers(j["uniform"], key + ".uniform");
            if (v.size() != 2) fail(key + ".uniform", "expected [lo, hi]");
            return ParameterDistribution::uniform(v[0], v[1]);
        }
        if (j.contains("discrete")) {
            const json& d = j["discrete"];
            if (!d.is_object() || !d.contains("values")) fail(key + ".discrete", "expected {values, weights}");
            const auto values = numbers(d["values"], key + ".discrete.values");
            const auto weights = d.contains("weights") ? numbers(d["weights"], key + ".discrete.weights")
                                                       : std::vector<double>(values.size(), 1.0);
            return ParameterDistribution::discrete(values, weights);
        }
    } catch (const ConfigError& e) {
        if (std::string(e.what()).rfind("config:", 0) == 0) throw;
        fail(key, e.what());
    }
    fail(key, "unknown distribution kind");
}

std::shared_ptr<const ProbabilityLaw> law_from(const json* l, int dim) {
    ParameterDistribution E = ParameterDistribution::point(1.0), nu = ParameterDistribution::point(0.3),
                          sy = ParameterDistribution::point(0.01), H = ParameterDistribution::point(0.1);
    if (l) {
        if (!l->is_object()) fail("law", "expected an object");
        for (const auto& [k, v] : l->items()) {
            if (k == "E") E = distribution(v, "law.E");
            else if (k == "nu") nu = distribution(v, "law.nu");
            else if (k == "sigma_y") sy = distribution(v, "law.sigma_y");
            else if (k == "H") H = distribution(v, "law.H");
            else fail("law." + k, "unknown parameter");
        }
    }
    try {
        return std::make_shared<const ProbabilityLaw>(dim, E, nu, sy, H);
    } catch (const ConfigError& e) {
        fail("law", e.what());
    }
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const json* find(const json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

}  // namespace

ParameterDistribution parse_distribution(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return distribution(j, "distribution");
}

std::shared_ptr<const ProbabilityLaw> load_law(const std::string& path, int dim) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
    }
    // Either a bare law object or a run configuration containing one.
    return law_from(j.contains("law") ? &j["law"] : &j, dim);
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig c;

    if (const json* d = find(j, "domain")) {
        if (d->is_string()) {
            c.domain_type = d->get<std::string>();
            if (c.domain_type != "simplex") fail("domain", "only \"simplex\" may be given as a string");
        } else if (d->is_object()) {
            if (!d->contains("type") || !(*d)["type"].is_string()) fail("domain.type", "missing");
            c.domain_type = (*d)["type"].get<std::string>();
            if (c.domain_type == "simplex") {
                if (const json* v = find(*d, "vertices")) {
                    if (!v->is_array() || v->size() < 3 || v->size() > 4) fail("domain.vertices", "expected 3 or 4 points");
                    c.dim = static_cast<int>(v->size()) - 1;
                    for (const auto& p : *v) c.simplex.push_back(vector_of(p, "domain.vertices", c.dim));
                }
            } else if (c.domain_type == "box") {
                if (!d->contains("lower") || !d->contains("upper")) fail("domain", "box needs lower and upper");
                c.dim = static_cast<int>((*d)["lower"].size());
                c.box_lower = vector_of((*d)["lower"], "domain.lower", c.dim);
                c.box_upper = vector_of((*d)["upper"], "domain.upper", c.dim);
            } else {
                fail("domain.type", "expected simplex or box");
            }
        } else {
            fail("domain", "expected a string or an object");
        }
    }
    if (c.dim != 2 && c.dim != 3) fail("domain", "dimension must be 2 or 3");
    if (c.simplex.empty() && c.domain_type == "simplex") {
        SmallVector o = SmallVector::Zero(c.dim);
        c.simplex.push_back(o);
        // Kuhn simplex 0 <= x_d <= ... <= x_1 <= 1.
        for (int i = 0; i < c.dim; ++i) {
            o[i] = 1.0;
            c.simplex.push_back(o);
        }
    }

    if (const json* m = find(j, "mesh")) {
        if (const json* h = find(*m, "h")) c.h = number(*h, "mesh.h");
    }
    if (!(c.h > 0)) fail("mesh.h", "must be positive");
    if (const json* e = find(j, "epsilon")) c.epsilon = number(*e, "epsilon");
    if (!(c.epsilon > 0)) fail("epsilon", "must be positive");
    if (const json* e = find(j, "delta")) {
        c.delta = number(*e, "delta");
        if (!(*c.delta > 0)) fail("delta", "must be positive");
    }
    if (const json* f = find(j, "flow")) {
        if (!f->is_string()) fail("flow", "expected a string");
        c.flow = parse_flow_kind(f->get<std::string>());
    }
    if (const json* t = find(j, "time")) {
        if (const json* T = find(*t, "T")) c.T = number(*T, "time.T");
        if (const json* s = find(*t, "steps")) c.steps = integer(*s, "time.steps");
    }
    if (!(c.T > 0)) fail("time.T", "must be positive");
    if (c.steps < 1) fail("time.steps", "must be >= 1");

    c.law = law_from(find(j, "law"), c.dim);

    if (const json* r = find(j, "rve")) {
        if (const json* v = find(*r, "N")) c.rve_N = integer(*v, "rve.N");
        if (const json* v = find(*r, "r")) c.rve_r = integer(*v, "rve.r");
        if (const json* v = find(*r, "M")) c.rve_M = integer(*v, "rve.M");
    }
    if (c.rve_N < 1 || c.rve_r < 1 || c.rve_M < 1) fail("rve", "N, r and M must be >= 1");

    c.a_rate = SmallVector::Zero(c.dim);
    c.load_rate = SmallVector::Zero(c.dim);
    if (const json* bc = find(j, "bc")) {
        if (const json* xi = find(*bc, "xi")) {
            try {
                if (xi->is_string()) {
                    std::filesystem::path p(xi->get<std::string>());
                    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                    std::istringstream is(slurp(p.string()));
                    c.xi = StrainPath::read_csv(is, c.dim);
                } else if (xi->is_object()) {
                    const auto knots = numbers((*xi)["knots"], "bc.xi.knots");
                    const json& vals = (*xi)["values"];
                    if (!vals.is_array() || vals.size() != knots.size()) fail("bc.xi.values", "one value per knot");
                    std::vector<SymTensor> v;
                    for (const auto& row : vals) v.emplace_back(c.dim, vector_of(row, "bc.xi.values", mandel_size(c.dim)));
                    c.xi = StrainPath(knots, v);
                } else {
                    fail("bc.xi", "expected a CSV path or {knots, values}");
                }
            } catch (const ConfigError& e) {
                if (std::string(e.what()).rfind("config:", 0) == 0) throw;
                fail("bc.xi", e.what());
            }
        }
        if (const json* a = find(*bc, "a")) c.a_rate = vector_of(*a, "bc.a", c.dim);
    }
    if (c.xi.knots().empty()) {
        // Default: uniaxial-deviatoric loading to 2 percent strain.
        MandelVector v = MandelVector::Zero(mandel_size(c.dim));
        v[0] = 0.02;
        v[1] = -0.01;
        c.xi = StrainPath::linear(SymTensor(c.dim, v), c.T);
    }
    if (const json* f = find(j, "load")) c.load_rate = vector_of(*f, "load", c.dim);
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) fail("seed", "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    if (const json* t = find(j, "threads")) c.threads = integer(*t, "threads");
    if (const json* n = find(j, "newton")) {
        if (!n->is_object()) fail("newton", "expected an object");
        for (const auto& [k, v] : n->items()) {
            const std::string key = "newton." + k;
            if (k == "rtol") c.newton.rtol = number(v, key);
            else if (k == "accept_rtol") c.newton.accept_rtol = number(v, key);
            else if (k == "max_iterations") c.newton.max_iterations = integer(v, key);
            else if (k == "solver") {
                if (v == "direct") c.newton.solver = LinearSolverKind::Direct;
                else if (v == "cg") c.newton.solver = LinearSolverKind::ConjugateGradient;
                else fail(key, "expected direct or cg");
            } else fail(key, "unknown key");
        }
        if (!(c.newton.rtol > 0) || c.newton.accept_rtol < c.newton.rtol || c.newton.max_iterations < 1)
            fail("newton", "need 0 < rtol <= accept_rtol and max_iterations >= 1");
    }

    if (const json* x = find(j, "experiment")) {
        if (!x->is_object()) fail("experiment", "expected an object");
        for (const auto& [k, v] : x->items()) {
            const std::string key = "experiment." + k;
            if (k == "epsilons") c.epsilons = numbers(v, key);
            else if (k == "seeds") c.num_seeds = integer(v, key);
            else if (k == "divisions") c.divisions = integer(v, key);
            else if (k == "korn_N") c.korn_N = integer(v, key);
            else if (k == "korn_r") c.korn_r = integer(v, key);
            else if (k == "korn_samples") c.korn_samples = integer(v, key);
            else if (k == "box_sizes") c.box_sizes = numbers(v, key);
            else if (k == "ergodic_seeds") c.ergodic_seeds = integer(v, key);
            else if (k == "max_seconds") c.max_seconds = number(v, key);
            else fail(key, "unknown key");
        }
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_run_config(slurp(path), dir.empty() ? "." : dir);
}

double RunConfig::effective_delta() const { return delta ? *delta : 1e-2 * law->yield_stress().mean(); }

std::shared_ptr<const SimplicialMesh> RunConfig::build_mesh() const {
    if (domain_type == "box") {
        const double side = (box_upper - box_lower).maxCoeff();
        const int n = std::max(1, static_cast<int>(std::ceil(side * std::sqrt(static_cast<double>(dim)) / h - 1e-12)));
        return std::make_shared<const SimplicialMesh>(mesh_box(box_lower, box_upper, n));
    }
    return std::make_shared<const SimplicialMesh>(mesh_simplex(simplex, h));
}

std::vector<double> RunConfig::time_grid() const { return uniform_grid(T, steps); }

DirichletData RunConfig::dirichlet() const {
    std::function<SmallVector(double)> a;
    if (a_rate.size() && a_rate.norm() > 0) {
        const SmallVector rate = a_rate;
        a = [rate](double t) -> SmallVector { return t * rate; };
    }
    return DirichletData::affine(xi, a);
}

TimeVectorField RunConfig::load() const {
    if (!load_rate.size() || load_rate.norm() == 0) return {};
    const SmallVector rate = load_rate;
    return [rate](double t, const SmallVector&) -> SmallVector { return t * rate; };
}

EpsProblemConfig RunConfig::eps_config() const {
    EpsProblemConfig c;
    c.mesh = build_mesh();
    c.medium = sample_realization(law, seed);
    c.epsilon = epsilon;
    c.flow = flow;
    c.delta = effective_delta();
    c.time_grid = time_grid();
    c.dirichlet = dirichlet();
    c.load = load();
    c.newton = newton;
    return c;
}

RveConfig RunConfig::rve_config() const {
    RveConfig c;
    c.N = rve_N;
    c.r = rve_r;
    c.M = rve_M;
    c.delta = effective_delta();
    c.flow = flow;
    c.law = law;
    c.base_seed = seed;
    c.threads = threads;
    c.newton = newton;
    return c;
}

MacroConfig RunConfig::macro_config() const {
    MacroConfig c;
    c.mesh = build_mesh();
    c.rve = rve_config();
    c.rve.threads = 1;
    c.dirichlet = dirichlet();
    c.load = load();
    c.time_grid = time_grid();
    c.max_seconds = max_seconds;
    c.threads = threads;
    return c;
}

AveragingSpec RunConfig::averaging_spec() const {
    AveragingSpec s;
    s.law = law;
    if (domain_type != "simplex") throw ConfigError("config: 'domain': the averaging experiment needs a simplex");
    s.simplex = simplex;
    s.divisions = divisions;
    s.xi = xi;
    s.translation = dirichlet().translation;
    s.epsilons = epsilons;
    for (int i = 0; i < num_seeds; ++i) s.seeds.push_back(seed + static_cast<std::uint64_t>(i));
    s.time_grid = time_grid();
    s.flow = flow;
    s.delta = effective_delta();
    s.rve_N = rve_N;
    s.rve_r = rve_r;
    s.rve_M = rve_M;
    s.rve_seed = seed + 1000;
    s.threads = threads;
    return s;
}

KornSpec RunConfig::korn_spec() const {
    KornSpec s;
    s.N = korn_N;
    s.r = korn_r;
    s.dim = dim;
    s.samples = korn_samples;
    s.seed = seed;
    s.threads = threads;
    return s;
}

ErgodicSpec RunConfig::ergodic_spec() const {
    ErgodicSpec s;
    s.law = law;
    s.box_sizes = box_sizes;
    s.seeds = ergodic_seeds;
    s.base_seed = seed;
    s.threads = threads;
    return s;
}

}  // namespace plasthom
