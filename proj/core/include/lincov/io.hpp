#pragma once

#include <Eigen/Dense>
#include <string>

#include "lincov/estimate.hpp"
#include "lincov/model.hpp"
#include "lincov/symmetric_matrix.hpp"

namespace lincov {

// Model description formats:
//   matrix spec {"p": int, "G0": [[...]], "basis": [[[...]], ...]}
//   tree spec   {"parent": [ints, -1 for root], "leaves": [ints]}
// Matrices are dense row-major arrays. Shape or type problems raise
// ParseError; model-level problems (dependent basis, bad tree) keep their
// specific error types.
LinearCovarianceModel parse_model_json(const std::string& text);
LinearCovarianceModel load_model_json(const std::string& path);

// Square numeric CSV, p rows of p comma-separated values, no header.
SymmetricMatrix read_matrix_csv(const std::string& path);

// Rectangular numeric CSV, one observation per row.
Eigen::MatrixXd read_data_csv(const std::string& path);

// JSON object {v_hat, loglik, iterations, converged, diagnostics{...}}.
std::string fit_result_json(const FitResult& result);

}  // namespace lincov
