#ifndef RUC_RUC_HPP
#define RUC_RUC_HPP

#include "ruc/case_io.hpp"
#include "ruc/ccg.hpp"
#include "ruc/compact_form.hpp"
#include "ruc/errors.hpp"
#include "ruc/gaussian.hpp"
#include "ruc/master_problem.hpp"
#include "ruc/milp/export.hpp"
#include "ruc/milp/model.hpp"
#include "ruc/milp/solve.hpp"
#include "ruc/oracle.hpp"
#include "ruc/reporting.hpp"
#include "ruc/subproblem.hpp"
#include "ruc/system_model.hpp"

#endif  // RUC_RUC_HPP
