"""Space-dependent entanglement lab: localized CHSH correlations, Franson coincidences
and the distance dependence of a driven massless field."""

__version__ = "0.1.0"
