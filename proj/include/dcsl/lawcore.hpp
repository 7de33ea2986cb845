#pragma once

#include <cstdint>
#include <string>

namespace dcsl {

// Fitted scaling-law constants for one model family. Loss is predicted as
//   L(N, U, E) = A/(N')^alpha + B/(D')^beta + E0
// where D' discounts repeated data and N' discounts excess parameters.
struct LawParams {
  double A = 0.0;
  double B = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double E0 = 0.0;
  double r_d_star = 0.0;
  double r_n_star = 0.0;

  // All fields finite and > 0.
  void validate() const;
};

struct Allocation {
  double n_opt = 0.0;
  double d_opt = 0.0;
  double flops = 0.0;
};

// D' = U + U*R*(1 - exp(-(E-1)/R)). Increasing in E, capped at U*(1+R).
// r_d_star may be +infinity, in which case D' = U*E exactly.
double effective_data(double unique_tokens, double epochs, double r_d_star);

// Exact geometric sum U * (1 - (1-delta)^E) / delta over integer epochs.
// Oracle counterpart of effective_data with delta = 1/(1+R).
double effective_data_geometric(double unique_tokens, std::int64_t epochs,
                                double delta);

// N' = N when N <= U_N, else the mirror of effective_data with
// "parameter epochs" N/U_N. u_n may be +infinity (no excess -> N).
double effective_params(double n_params, double u_n, double r_n_star);

// A/(N')^alpha + B/(D')^beta + E0.
double predict_loss(const LawParams& law, double n_params, double unique_tokens,
                    double epochs, double u_n);

// Single-epoch form with no repetition discounts: A/N^alpha + B/D^beta + E0.
double chinchilla_loss(double A, double B, double alpha, double beta, double E0,
                       double n_params, double tokens);

// D'/(U*E): fraction of fresh-data value retained after E epochs.
double effective_fraction(double unique_tokens, double epochs, double r_d_star);

// Minimizes A/N^alpha + B/D^beta subject to 6*N*D = C. Closed form
// N_opt = G*(C/6)^(beta/(alpha+beta)), G = (alpha*A/(beta*B))^(1/(alpha+beta)).
Allocation optimal_allocation(const LawParams& law, double flops);

// Compute-optimal parameter count paired with U unique tokens:
// U_N = G*(G*U)^(beta/alpha) (the C solving d_opt(C) = U, evaluated at n_opt).
double base_params(const LawParams& law, double unique_tokens);

// Flat json object with the seven field names; exact decimal round-trip.
std::string law_to_json(const LawParams& law);
LawParams law_from_json_text(const std::string& text);
// Accepts either the flat law object or a fit-output json ({stage1, stage2}).
LawParams load_law_file(const std::string& path);
void save_law_file(const std::string& path, const LawParams& law);

}  // namespace dcsl
