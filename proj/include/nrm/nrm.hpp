#pragma once

#include "nrm/cumulants.hpp"
#include "nrm/eppf.hpp"
#include "nrm/errors.hpp"
#include "nrm/mixture.hpp"
#include "nrm/models/config.hpp"
#include "nrm/models/families.hpp"
#include "nrm/models/family.hpp"
#include "nrm/models/thorin.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/numerics/quadrature.hpp"
#include "nrm/numerics/special_functions.hpp"
#include "nrm/partition.hpp"
#include "nrm/random.hpp"
#include "nrm/samplers/partition_samplers.hpp"
#include "nrm/samplers/u_samplers.hpp"
#include "nrm/samplers/weighted.hpp"
#include "nrm/version.hpp"
