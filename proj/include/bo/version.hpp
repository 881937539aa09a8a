#ifndef BO_VERSION_HPP
#define BO_VERSION_HPP

#define BO_VERSION_STRING "0.1.0"

#endif
