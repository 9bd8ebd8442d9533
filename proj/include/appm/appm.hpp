#pragma once

#include "appm/core.hpp"
#include "appm/linalg.hpp"
#include "appm/operators.hpp"
#include "appm/methods.hpp"
#include "appm/pep_cert.hpp"
#include "appm/prox.hpp"
#include "appm/splitting.hpp"
#include "appm/problems.hpp"
#include "appm/experiment.hpp"
