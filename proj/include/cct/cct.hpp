// cct.hpp: umbrella header for the coupon collection toolkit.
#pragma once

#include "cct/scalar.hpp"
#include "cct/probmodel.hpp"
#include "cct/exact.hpp"
#include "cct/oracle.hpp"
#include "cct/ordering.hpp"
#include "cct/icebergsim.hpp"
#include "cct/io.hpp"
