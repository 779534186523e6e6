def get_plugin(problem: str):
    """Get the Cut&Count plugin class for a problem."""
    if problem == "steiner":
        from .plugins import SteinerPlugin

        return SteinerPlugin
    elif problem == "cvc":
        from .plugins import CvcPlugin

        return CvcPlugin
    elif problem == "fvs":
        from .plugins import FvsPlugin

        return FvsPlugin
    elif problem in ("oct", "coct"):
        from .plugins import CoctPlugin

        return CoctPlugin
    else:
        raise ValueError(f"Unknown problem: {problem}")
