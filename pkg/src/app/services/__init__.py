# src.app.services package
