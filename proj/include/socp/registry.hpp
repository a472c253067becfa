#pragma once

#include "socp/actions.hpp"
#include "socp/problem.hpp"

namespace socp {

std::vector<std::string> registry_problem_names();
std::vector<std::string> registry_action_names();
std::vector<std::string> registry_formulation_names();

/// Builds a registry problem; params override the problem's defaults (e.g.
/// m, gammaM for the orbital transfer).
OcpProblem make_problem(const std::string& name,
                        const std::map<std::string, double>& params = {});

/// Builds a registry action; dim_q matters only for poly_flow, which acts
/// componentwise in any dimension.
OneParamAction make_action(const std::string& name, int dim_q = 2);

}  // namespace socp
