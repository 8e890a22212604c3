#ifndef GBD_GBD_HPP
#define GBD_GBD_HPP

#include "gbd/hermitian.hpp"
#include "gbd/network.hpp"
#include "gbd/bounds.hpp"
#include "gbd/primal.hpp"
#include "gbd/master.hpp"
#include "gbd/baselines.hpp"
#include "gbd/benders.hpp"

#endif  // GBD_GBD_HPP
