#include "dcsl/lawcore.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dcsl/errors.hpp"

namespace dcsl {

void LawParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw DomainError(std::string("LawParams: ") + name +
                        " must be finite and > 0");
  };
  check(A, "A");
  check(B, "B");
  check(alpha, "alpha");
  check(beta, "beta");
  check(E0, "E0");
  check(r_d_star, "r_d_star");
  check(r_n_star, "r_n_star");
}

double effective_data(double unique_tokens, double epochs, double r_d_star) {
  if (unique_tokens <= 0.0)
    throw DomainError("effective_data: unique_tokens must be > 0");
  if (epochs < 1.0) throw DomainError("effective_data: epochs must be >= 1");
  if (r_d_star <= 0.0)
    throw DomainError("effective_data: r_d_star must be > 0");
  if (std::isinf(r_d_star)) return unique_tokens * epochs;
  // -expm1(-x) == 1 - exp(-x) without cancellation for small x
  return unique_tokens +
         unique_tokens * r_d_star * -std::expm1(-(epochs - 1.0) / r_d_star);
}

double effective_data_geometric(double unique_tokens, std::int64_t epochs,
                                double delta) {
  if (unique_tokens <= 0.0)
    throw DomainError("effective_data_geometric: unique_tokens must be > 0");
  if (epochs < 1) throw DomainError("effective_data_geometric: epochs must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("effective_data_geometric: delta must be in (0, 1)");
  // Direct summation; exact for the epoch counts this serves as oracle for.
  double sum = 0.0;
  double term = 1.0;
  for (std::int64_t k = 0; k < epochs; ++k) {
    sum += term;
    term *= (1.0 - delta);
  }
  return unique_tokens * sum;
}

double effective_params(double n_params, double u_n, double r_n_star) {
  if (n_params <= 0.0) throw DomainError("effective_params: n_params must be > 0");
  if (u_n <= 0.0) throw DomainError("effective_params: u_n must be > 0");
  if (r_n_star <= 0.0)
    throw DomainError("effective_params: r_n_star must be > 0");
  if (n_params <= u_n) return n_params;
  if (std::isinf(r_n_star)) return n_params;
  double excess_epochs = n_params / u_n - 1.0;
  return u_n + u_n * r_n_star * -std::expm1(-excess_epochs / r_n_star);
}

double predict_loss(const LawParams& law, double n_params, double unique_tokens,
                    double epochs, double u_n) {
  double d_eff = effective_data(unique_tokens, epochs, law.r_d_star);
  double n_eff = effective_params(n_params, u_n, law.r_n_star);
  return law.A / std::pow(n_eff, law.alpha) +
         law.B / std::pow(d_eff, law.beta) + law.E0;
}

double chinchilla_loss(double A, double B, double alpha, double beta, double E0,
                       double n_params, double tokens) {
  return A / std::pow(n_params, alpha) + B / std::pow(tokens, beta) + E0;
}

double effective_fraction(double unique_tokens, double epochs, double r_d_star) {
  return effective_data(unique_tokens, epochs, r_d_star) /
         (unique_tokens * epochs);
}

namespace {
double law_g(const LawParams& law) {
  return std::pow(law.alpha * law.A / (law.beta * law.B),
                  1.0 / (law.alpha + law.beta));
}
}  // namespace

Allocation optimal_allocation(const LawParams& law, double flops) {
  law.validate();
  if (flops <= 0.0) throw DomainError("optimal_allocation: flops must be > 0");
  if (law.alpha + law.beta == 0.0)
    throw DomainError("optimal_allocation: alpha + beta must be > 0");
  double g = law_g(law);
  Allocation a;
  a.flops = flops;
  a.n_opt = g * std::pow(flops / 6.0, law.beta / (law.alpha + law.beta));
  a.d_opt = (flops / 6.0) / a.n_opt;
  return a;
}

double base_params(const LawParams& law, double unique_tokens) {
  law.validate();
  if (unique_tokens <= 0.0)
    throw DomainError("base_params: unique_tokens must be > 0");
  double g = law_g(law);
  double u_n = g * std::pow(g * unique_tokens, law.beta / law.alpha);
  if (!std::isfinite(u_n) || u_n <= 0.0)
    throw NumericError("base_params: non-finite result for U=" +
                       std::to_string(unique_tokens));
  return u_n;
}

std::string law_to_json(const LawParams& law) {
  nlohmann::json j;
  j["A"] = law.A;
  j["B"] = law.B;
  j["alpha"] = law.alpha;
  j["beta"] = law.beta;
  j["E0"] = law.E0;
  j["r_d_star"] = law.r_d_star;
  j["r_n_star"] = law.r_n_star;
  return j.dump();
}

namespace {
LawParams law_from_json(const nlohmann::json& j) {
  nlohmann::json src = j;
  if (j.contains("stage1")) {
    // fit-output layout: {"stage1": {...}, "stage2": {...}, ...}
    src = j["stage1"];
    if (j.contains("stage2")) {
      for (auto& [k, v] : j["stage2"].items()) src[k] = v;
    }
  }
  LawParams law;
  auto get = [&](const char* name) {
    if (!src.contains(name))
      throw InputError(std::string("law json: missing field '") + name + "'");
    if (!src[name].is_number())
      throw InputError(std::string("law json: field '") + name +
                       "' is not a number");
    return src[name].get<double>();
  };
  law.A = get("A");
  law.B = get("B");
  law.alpha = get("alpha");
  law.beta = get("beta");
  law.E0 = get("E0");
  law.r_d_star = get("r_d_star");
  law.r_n_star = get("r_n_star");
  law.validate();
  return law;
}
}  // namespace

LawParams law_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("law json: parse error: ") + e.what());
  }
  return law_from_json(j);
}

LawParams load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_law_file: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return law_from_json_text(ss.str());
}

void save_law_file(const std::string& path, const LawParams& law) {
  std::ofstream out(path);
  if (!out) throw InputError("save_law_file: cannot open " + path);
  out << law_to_json(law) << "\n";
}

}  // namespace dcsl
