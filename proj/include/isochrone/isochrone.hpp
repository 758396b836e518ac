#pragma once

#include "isochrone/core.hpp"
#include "isochrone/criteria.hpp"
#include "isochrone/field.hpp"
#include "isochrone/integrate.hpp"
#include "isochrone/io.hpp"
#include "isochrone/isochrony.hpp"
#include "isochrone/models.hpp"
#include "isochrone/variational.hpp"
