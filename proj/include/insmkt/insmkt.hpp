#pragma once

#include "insmkt/equilibrium.hpp"
#include "insmkt/model.hpp"
#include "insmkt/numerics.hpp"
#include "insmkt/oracle.hpp"
#include "insmkt/scenario.hpp"
#include "insmkt/strategy.hpp"
#include "insmkt/welfare.hpp"
