#pragma once

#include "hofbutter/error.hpp"
#include "hofbutter/eigensolver.hpp"
#include "hofbutter/rational.hpp"
#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/spectrum.hpp"
#include "hofbutter/chern.hpp"
#include "hofbutter/diophantine.hpp"
#include "hofbutter/parallel.hpp"
#include "hofbutter/butterfly.hpp"
#include "hofbutter/io.hpp"
#include "hofbutter/verify.hpp"
