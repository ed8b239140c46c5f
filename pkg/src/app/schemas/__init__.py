# src.app.schemas package
