// Everything at once.
#pragma once

#include "mvops/catalog.hpp"
#include "mvops/construct.hpp"
#include "mvops/families.hpp"
#include "mvops/indexing.hpp"
#include "mvops/linrel.hpp"
#include "mvops/manifest.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/moments.hpp"
#include "mvops/polynomial.hpp"
#include "mvops/recurrence.hpp"
#include "mvops/report.hpp"
#include "mvops/ttr.hpp"
