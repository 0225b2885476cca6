from flask import Blueprint, current_app

main_bp = Blueprint('main', __name__)


@main_bp.route('/health')
def health():
    """Health check endpoint for load balancer monitoring"""
    kb = current_app.extensions.get('onto_tamp.kb')
    return {"status": "ok", "triples": len(kb) if kb is not None else 0}, 200
