#pragma once

#include "appl.hpp"
#include "cyclo.hpp"
#include "errors.hpp"
#include "fqm.hpp"
#include "fundamental.hpp"
#include "induct.hpp"
#include "jordan.hpp"
#include "numtheory.hpp"
#include "qmodz.hpp"
#include "sl2.hpp"
#include "smith.hpp"
#include "weil.hpp"
